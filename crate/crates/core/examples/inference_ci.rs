//! Confidence intervals for the selected coefficients, with f(0) estimated
//! from the residuals as one would on real data.
//!
//! `cargo run --release --example inference_ci`

use selo_qr::inference::{confidence_interval, estimate_f0, sigma_hat, AsymptoticContext};
use selo_qr::simulation::{generate, make_error_dist, ErrorKind, SimScenario};
use selo_qr::{select, BicConfig, FitConfig, QuantileLevel};

fn main() -> selo_qr::Result<()> {
    let tau = QuantileLevel::new(0.5)?;
    let mut beta0 = vec![0.0; 20];
    beta0[..3].copy_from_slice(&[2.0, -2.0, 1.5]);
    let law = make_error_dist(ErrorKind::Laplace { b: 1.0 }, tau)?;
    let (ds, _) = generate(&SimScenario::new(beta0.clone(), 800, law, 3, 1), 0)?;

    let sel = select(&ds, tau, &BicConfig::with_default_grids(&ds, tau), &FitConfig::default())?;
    let a = &sel.active_set;
    let f0 = estimate_f0(&sel.fit.residuals, None)?;
    println!("f(0): estimated {f0:.4}, true {:.4}", law.f0);

    let sigma = sigma_hat(&ds, a)?;
    let b_hat = a.gather(&sel.beta_hat);
    for (k, j) in a.iter().enumerate() {
        let mut u = vec![0.0; a.len()];
        u[k] = 1.0;
        let ctx = AsymptoticContext::new(sigma.clone(), f0, tau, ds.n(), u)?;
        let ci = confidence_interval(&ctx, &b_hat, 0.95)?;
        println!(
            "beta[{j}] = {:>7.4}  95% CI [{:>7.4}, {:>7.4}]  truth {:>5.2}",
            b_hat[k], ci.lower, ci.upper, beta0[j]
        );
    }
    Ok(())
}
