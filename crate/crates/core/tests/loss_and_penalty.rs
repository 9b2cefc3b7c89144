mod common;

use common::{rng, tau};
use proptest::prelude::*;
use rand::Rng;
use selo_qr::{
    check_loss, knight_decompose, objective, partial_residuals, penalty_derivative, penalty_total,
    penalty_value, Dataset, SeloTuning,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn check_loss_is_convex(u in -50.0..50.0f64, v in -50.0..50.0f64, a in 0.0..=1.0f64, t in 0.01..0.99f64) {
        let q = tau(t);
        let lhs = check_loss(a * u + (1.0 - a) * v, q);
        let rhs = a * check_loss(u, q) + (1.0 - a) * check_loss(v, q);
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn check_loss_nonnegative_zero_only_at_zero(u in -1e6..1e6f64, t in 0.01..0.99f64) {
        let l = check_loss(u, tau(t));
        prop_assert!(l >= 0.0);
        prop_assert_eq!(l == 0.0, u == 0.0);
    }

    #[test]
    fn penalty_is_symmetric_and_bounded(b in -1e3..1e3f64, lambda in 0.01..10.0f64, gamma in 1e-6..10.0f64) {
        let t = SeloTuning::new(lambda, gamma).unwrap();
        let p = penalty_value(b, t);
        prop_assert_eq!(p, penalty_value(-b, t));
        prop_assert!(p >= 0.0 && p < lambda);
    }
}

#[test]
fn lipschitz_bound_on_random_pairs() {
    let mut r = rng(1);
    for _ in 0..100_000 {
        let u: f64 = r.random_range(-20.0..20.0);
        let v: f64 = r.random_range(-20.0..20.0);
        let q = tau(r.random_range(0.01..0.99));
        assert!((check_loss(u - v, q) - check_loss(u, q)).abs() <= v.abs() + 1e-12);
    }
}

#[test]
fn knight_identity_on_random_triples() {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for k in 0..100_000 {
        // a tenth of the draws hit the x = 0 and y = x edges exactly
        let x: f64 = if k % 20 == 0 { 0.0 } else { r.random_range(-10.0..10.0) };
        let y: f64 = if k % 20 == 1 { x } else { r.random_range(-10.0..10.0) };
        let q = tau(r.random_range(0.01..0.99));
        let (lin, int) = knight_decompose(x, y, q);
        let gap = (lin + int - (check_loss(x - y, q) - check_loss(x, q))).abs();
        worst = worst.max(gap);
    }
    assert!(worst <= 1e-12, "worst gap {worst}");
}

#[test]
fn knight_spec_examples() {
    assert_eq!(knight_decompose(1.0, 2.0, tau(0.5)), (-1.0, 1.0));
    assert_eq!(knight_decompose(-1.0, -2.0, tau(0.5)), (-1.0, 1.0));
    let (a, b) = knight_decompose(3.0, 0.0, tau(0.7));
    assert_eq!(a, 0.0);
    assert_eq!(b, 0.0);
}

#[test]
fn objective_matches_direct_summation() {
    let mut r = rng(3);
    for _ in 0..50 {
        let (n, d) = (r.random_range(2..60), r.random_range(1..8));
        let (ds, _) = common::random_dataset(&mut r, n, d);
        let beta: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let q = tau(r.random_range(0.05..0.95));
        let t = SeloTuning::new(r.random_range(0.0..2.0), r.random_range(1e-4..1.0)).unwrap();

        let mut loss = 0.0;
        for i in 0..n {
            let mut fit = 0.0;
            for j in 0..d {
                fit += ds.get(i, j) * beta[j];
            }
            let u = ds.y()[i] - fit;
            loss += if u < 0.0 { u * (q.value() - 1.0) } else { u * q.value() };
        }
        let mut pen = 0.0;
        for &b in &beta {
            pen += t.lambda / std::f64::consts::LN_2 * (1.0 + b.abs() / (b.abs() + t.gamma)).ln();
        }
        let expect = loss / (2.0 * n as f64) + pen;
        let got = objective(&ds, &beta, q, t).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect.max(1.0), "{got} vs {expect}");
        let split = loss / (2.0 * n as f64) + penalty_total(&beta, t);
        assert!((got - split).abs() <= 1e-12 * got.max(1.0));
    }
}

#[test]
fn objective_hand_value_and_dimension_check() {
    let ds = Dataset::from_rows(vec![1.0, -1.0], &[vec![1.0], vec![1.0]]).unwrap();
    let t = SeloTuning::new(1.0, 0.1).unwrap();
    assert!((objective(&ds, &[0.0], tau(0.5), t).unwrap() - 0.25).abs() < 1e-15);
    assert!(objective(&ds, &[0.0, 1.0], tau(0.5), t).is_err());
}

#[test]
fn partial_residuals_reconstruct() {
    let mut r = rng(4);
    let (ds, _) = common::random_dataset(&mut r, 40, 5);
    let beta: Vec<f64> = (0..5).map(|_| r.random_range(-2.0..2.0)).collect();
    let full = ds.residuals(&beta).unwrap();
    for j in 0..5 {
        let p = partial_residuals(&ds, &beta, j).unwrap();
        for i in 0..40 {
            assert!((p[i] - (full[i] + ds.get(i, j) * beta[j])).abs() <= 1e-12);
        }
    }
    assert!(partial_residuals(&ds, &beta, 5).is_err());
}

#[test]
fn penalty_monotone_on_sorted_sample() {
    let mut r = rng(5);
    let t = SeloTuning::new(1.3, 0.02).unwrap();
    let mut b: Vec<f64> = (0..10_000).map(|_| r.random_range(0.0..50.0)).collect();
    b.sort_by(f64::total_cmp);
    for w in b.windows(2) {
        assert!(penalty_value(w[0], t) <= penalty_value(w[1], t));
    }
}

#[test]
fn penalty_concave_on_positive_grid() {
    for &gamma in &[1e-4, 0.01, 1.0] {
        let t = SeloTuning::new(1.0, gamma).unwrap();
        let h = 1e-3;
        for k in 1..5000 {
            let b = k as f64 * h;
            let second = penalty_value(b + h, t) - 2.0 * penalty_value(b, t) + penalty_value(b - h, t);
            assert!(second <= 1e-12, "γ = {gamma}, b = {b}: {second}");
        }
    }
}

#[test]
fn penalty_difference_bound_away_from_zero() {
    // g(x) = log(1 + |x|/(|x|+γ)); for |x| ≥ C the slope is at most γ/C², so K = 4/C² is safe
    let c = 0.5;
    let k = 4.0 / (c * c);
    let mut r = rng(6);
    let g = |x: f64, gamma: f64| (x.abs() / (x.abs() + gamma)).ln_1p();
    for _ in 0..10_000 {
        let gamma = r.random_range(1e-8..1e-3);
        let x1: f64 = r.random_range(c..20.0) * if r.random::<bool>() { 1.0 } else { -1.0 };
        let step: f64 = r.random_range(-1e-3..1e-3);
        let x2 = (x1.abs() + step).max(c) * if r.random::<bool>() { 1.0 } else { -1.0 };
        let lhs = (g(x2, gamma) - g(x1, gamma)).abs();
        let rhs = k * gamma * (x2.abs() - x1.abs()).abs();
        assert!(lhs <= rhs + 1e-15, "{lhs} > {rhs}");
    }
}

#[test]
fn derivative_matches_central_difference() {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t = SeloTuning::new(r.random_range(0.1..3.0), r.random_range(1e-2..2.0)).unwrap();
        let b: f64 = r.random_range(1e-3..20.0);
        let h = 1e-6;
        let fd = (penalty_value(b + h, t) - penalty_value(b - h, t)) / (2.0 * h);
        let der = penalty_derivative(b, t);
        worst = worst.max((der - fd).abs() / der.abs().max(1.0));
        assert_eq!(penalty_derivative(-b, t), der);
    }
    assert!(worst <= 1e-4, "worst relative gap {worst}");
}
