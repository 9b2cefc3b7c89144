//! Monte Carlo check of support recovery, the error rate and normality of
//! the standardized statistic. Replications run on all cores.
//!
//! `cargo run --release --example simulate_oracle`

use selo_qr::simulation::{
    log_log_slope, make_error_dist, run_replications, ErrorKind, RatePoint, SimScenario,
};
use selo_qr::{BicConfig, FitConfig, QuantileLevel};

fn main() -> selo_qr::Result<()> {
    let tau = QuantileLevel::new(0.5)?;
    let fc = FitConfig::default();
    let bc = BicConfig::default();

    for (name, kind) in [
        ("normal", ErrorKind::Normal { sigma: 1.0 }),
        ("t(3)", ErrorKind::StudentT { nu: 3.0 }),
        ("cauchy", ErrorKind::Cauchy { s: 1.0 }),
    ] {
        let law = make_error_dist(kind, tau)?;
        let mut beta0 = vec![0.0; 28];
        beta0[..3].copy_from_slice(&[2.0, -2.0, 1.5]);
        let m = run_replications(&SimScenario::new(beta0, 800, law, 2024, 200), &fc, &bc)?;
        println!(
            "{name:>7}: recovery {:.3}  median l2 {:.4}  KS {:.4}  95% coverage {:.3}",
            m.exact_recovery_rate,
            m.median_l2,
            m.ks_to_normal.unwrap_or(f64::NAN),
            m.ci_coverage.unwrap_or(f64::NAN)
        );
    }

    let law = make_error_dist(ErrorKind::Normal { sigma: 1.0 }, tau)?;
    let base = SimScenario::new(vec![2.0, -2.0, 1.5], 100, law, 5, 100);
    let mut points = Vec::new();
    for n in [100, 200, 400, 800] {
        let (p, _) = RatePoint::measure(&base, n, &fc, &bc)?;
        println!("n = {:>3}, d = {:>2}: alpha_n {:.4}, median l2 {:.4}", p.n, p.d, p.alpha_n, p.median_l2);
        points.push(p);
    }
    println!("log-log slope on alpha_n: {:.3}", log_log_slope(&points).unwrap_or(f64::NAN));
    Ok(())
}
