//! The SELO penalty and its LLA weight next to the L1 penalty, as a CSV table
//! for plotting.
//!
//! `cargo run --release --example penalty_shape > penalty.csv`

use selo_qr::{penalty_derivative, penalty_value, SeloTuning};

fn main() -> selo_qr::Result<()> {
    let lambda = 1.0;
    let gammas = [0.01, 0.1, 1.0];
    let tunings: Vec<SeloTuning> = gammas
        .iter()
        .map(|&g| SeloTuning::new(lambda, g))
        .collect::<Result<_, _>>()?;

    let mut header = vec!["beta".to_string(), "l1".to_string()];
    for g in gammas {
        header.push(format!("selo_gamma_{g}"));
        header.push(format!("weight_gamma_{g}"));
    }
    println!("{}", header.join(","));
    for k in -300..=300 {
        let b = k as f64 / 100.0;
        let mut row = vec![format!("{b}"), format!("{}", lambda * b.abs())];
        for t in &tunings {
            row.push(format!("{:.6}", penalty_value(b, *t)));
            row.push(format!("{:.6}", penalty_derivative(b, *t)));
        }
        println!("{}", row.join(","));
    }
    Ok(())
}
