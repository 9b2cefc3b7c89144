//! Choose (λ, γ) and the model by BIC over the default grids.
//!
//! `cargo run --release --example select_bic`

use selo_qr::simulation::{generate, make_error_dist, ErrorKind, SimScenario};
use selo_qr::{select, BicConfig, FitConfig, QuantileLevel};

fn main() -> selo_qr::Result<()> {
    let tau = QuantileLevel::new(0.5)?;
    let mut beta0 = vec![0.0; 30];
    beta0[..3].copy_from_slice(&[2.0, -2.0, 2.0]);
    let law = make_error_dist(ErrorKind::StudentT { nu: 3.0 }, tau)?;
    let (ds, _) = generate(&SimScenario::new(beta0, 400, law, 11, 1), 0)?;

    let cfg = BicConfig::with_default_grids(&ds, tau);
    let sel = select(&ds, tau, &cfg, &FitConfig::default())?;

    println!("S_n = {:.3}, cap on nonzeros = {}", sel.sn, sel.cap);
    println!("{:>10} {:>10} {:>4} {:>10}", "lambda", "gamma", "k", "bic");
    for cell in &sel.scoreboard {
        let mark = if cell.score == sel.best { " <- best" } else if !cell.feasible { " (over cap)" } else { "" };
        println!(
            "{:>10.5} {:>10.2e} {:>4} {:>10.5}{mark}",
            cell.score.lambda, cell.score.gamma, cell.score.k_nonzero, cell.score.value
        );
    }
    println!("selected {:?}", sel.active_set.as_slice());
    Ok(())
}
