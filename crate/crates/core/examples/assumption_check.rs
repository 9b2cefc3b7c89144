//! Design diagnostics: eigenvalue bounds of the Gram matrix and the row-norm
//! condition, for independent and AR(1) designs.
//!
//! `cargo run --release --example assumption_check`

use selo_qr::simulation::{assumption_report, generate, make_error_dist, Design, ErrorKind, SimScenario};
use selo_qr::QuantileLevel;

fn main() -> selo_qr::Result<()> {
    let tau = QuantileLevel::new(0.5)?;
    let law = make_error_dist(ErrorKind::Normal { sigma: 1.0 }, tau)?;
    for design in [
        Design::GaussianIid,
        Design::GaussianCorrelated { rho: 0.5 },
        Design::GaussianCorrelated { rho: 0.9 },
    ] {
        for n in [200, 2000] {
            let mut sc = SimScenario::new(vec![0.0; 20], n, law, 1, 1);
            sc.design = design;
            let (ds, _) = generate(&sc, 0)?;
            let r = assumption_report(&ds);
            println!(
                "{design:?} n = {n:>4}: eigenvalues [{:.3}, {:.3}], max row norm {:.2}, alpha_n {:.3}, ratio {:.2}",
                r.lambda_min, r.lambda_max, r.max_row_norm, r.alpha_n, r.a3_ratio
            );
        }
    }
    Ok(())
}
