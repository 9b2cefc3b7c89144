//! Fit one tuning pair on simulated data and print the estimate.
//!
//! `cargo run --release --example fit_basic`

use selo_qr::simulation::{default_tuning, generate, make_error_dist, ErrorKind, SimScenario};
use selo_qr::{fit, FitConfig, QuantileLevel};

fn main() -> selo_qr::Result<()> {
    let tau = QuantileLevel::new(0.5)?;
    let mut beta0 = vec![0.0; 10];
    beta0[..3].copy_from_slice(&[2.0, -2.0, 1.5]);
    let law = make_error_dist(ErrorKind::Normal { sigma: 1.0 }, tau)?;
    let sc = SimScenario::new(beta0.clone(), 200, law, 7, 1);
    let (ds, _) = generate(&sc, 0)?;

    let tuning = default_tuning(ds.n(), ds.d(), 1.0);
    let res = fit(&ds, tau, tuning, &FitConfig::default(), None)?;

    println!("lambda = {:.4}, gamma = {:.2e}", tuning.lambda, tuning.gamma);
    println!("{:>4} {:>9} {:>9}", "j", "truth", "estimate");
    for (j, (b0, b)) in beta0.iter().zip(&res.beta_hat).enumerate() {
        println!("{j:>4} {b0:>9.3} {b:>9.4}");
    }
    println!(
        "active set {:?}, objective {:.6}, {} outer iterations, converged = {}",
        res.active_set.as_slice(),
        res.objective,
        res.outer_iters,
        res.converged
    );
    Ok(())
}
