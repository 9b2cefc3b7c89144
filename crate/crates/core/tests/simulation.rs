mod common;

use common::{rng, scenario, sparse_truth, tau};
use selo_qr::simulation::{
    assumption_report, generate, make_error_dist, run_replications, run_replications_with,
    Estimator, ErrorKind,
};
use selo_qr::{BicConfig, FitConfig};

#[test]
fn error_laws_have_tau_quantile_zero() {
    let laws = [
        ErrorKind::Normal { sigma: 1.0 },
        ErrorKind::StudentT { nu: 3.0 },
        ErrorKind::Laplace { b: 1.0 },
        ErrorKind::Cauchy { s: 1.0 },
    ];
    let mut g = rng(41);
    for kind in laws {
        for t in [0.25, 0.5, 0.75] {
            let law = make_error_dist(kind, tau(t)).unwrap();
            let m = 100_000;
            let below = (0..m).filter(|_| law.sample(&mut g) < 0.0).count();
            let frac = below as f64 / m as f64;
            assert!((frac - t).abs() < 0.01, "{kind:?} τ={t}: {frac}");
            assert!(law.f0 > 0.0 && law.f0.is_finite());
        }
    }
}

#[test]
fn gaussian_design_is_well_conditioned() {
    let sc = scenario(vec![0.0; 20], 2000, ErrorKind::Normal { sigma: 1.0 }, 0.5, 3, 1);
    let (ds, _) = generate(&sc, 0).unwrap();
    let r = assumption_report(&ds);
    assert!((0.7..=1.0).contains(&r.lambda_min), "{}", r.lambda_min);
    assert!((1.0..=1.35).contains(&r.lambda_max), "{}", r.lambda_max);
    assert!((r.alpha_n - 0.1).abs() < 1e-12);
}

#[test]
fn noiseless_data_recover_the_support() {
    let beta0 = sparse_truth(10, &[2.0, -2.0, 1.5]);
    let sc = scenario(beta0, 200, ErrorKind::Normal { sigma: 1e-8 }, 0.5, 5, 20);
    let m = run_replications(&sc, &FitConfig::default(), &BicConfig::default()).unwrap();
    assert_eq!(m.exact_recovery_rate, 1.0);
    assert_eq!(m.fpr, Some(0.0));
    assert_eq!(m.tpr, Some(1.0));
    assert!(m.median_l2 < 0.05);
}

#[test]
fn null_model_selects_few_false_positives() {
    let mut sc = scenario(vec![0.0; 10], 400, ErrorKind::Normal { sigma: 1.0 }, 0.5, 6, 20);
    sc.estimator = Estimator::Bic;
    let m = run_replications(&sc, &FitConfig::default(), &BicConfig::default()).unwrap();
    assert_eq!(m.tpr, None);
    assert!(m.fpr.unwrap() <= 0.05, "{:?}", m.fpr);
    assert!(m.z_samples.is_empty() && m.ks_to_normal.is_none());
}

#[test]
fn single_replication_aggregates() {
    let beta0 = sparse_truth(6, &[1.0, -1.0]);
    let sc = scenario(beta0, 100, ErrorKind::Laplace { b: 1.0 }, 0.5, 8, 1);
    let m = run_replications(&sc, &FitConfig::default(), &BicConfig::default()).unwrap();
    assert_eq!(m.replications.len(), 1);
    assert_eq!(m.median_l2, m.l2_errors[0]);
    assert!(m.exact_recovery_rate == 0.0 || m.exact_recovery_rate == 1.0);
}

#[test]
fn replications_are_reproducible_and_order_free() {
    let beta0 = sparse_truth(8, &[2.0, -1.5]);
    let sc = scenario(beta0, 150, ErrorKind::StudentT { nu: 3.0 }, 0.5, 9, 6);
    let fc = FitConfig::default();
    let bc = BicConfig::default();
    let a = run_replications(&sc, &fc, &bc).unwrap();
    let b = run_replications(&sc, &fc, &bc).unwrap();
    assert_eq!(a, b);
    let subset = run_replications_with(&sc, &[4, 1], &fc, &bc).unwrap();
    assert_eq!(subset[0], a.replications[4]);
    assert_eq!(subset[1], a.replications[1]);
    assert!(run_replications_with(&sc, &[6], &fc, &bc).is_err());
}

#[test]
fn invalid_scenarios_are_rejected() {
    let sc = scenario(vec![1.0; 5], 5, ErrorKind::Normal { sigma: 1.0 }, 0.5, 1, 1);
    assert!(run_replications(&sc, &FitConfig::default(), &BicConfig::default()).is_err());
    let mut sc = scenario(vec![1.0; 3], 50, ErrorKind::Normal { sigma: 1.0 }, 0.5, 1, 1);
    sc.reps = 0;
    assert!(generate(&sc, 0).is_err());
}
