#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use selo_qr::simulation::{make_error_dist, ErrorKind, SimScenario};
use selo_qr::{Dataset, QuantileLevel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tau(t: f64) -> QuantileLevel {
    QuantileLevel::new(t).unwrap()
}

/// Gaussian design, sparse-ish truth, Gaussian noise.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Dataset, Vec<f64>) {
    let x: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    let beta: Vec<f64> = (0..d)
        .map(|_| if rng.random::<f64>() < 0.5 { rng.random_range(-3.0..3.0) } else { 0.0 })
        .collect();
    let y = (0..n)
        .map(|i| {
            let row = &x[i * d..(i + 1) * d];
            let noise: f64 = StandardNormal.sample(rng);
            row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + noise
        })
        .collect();
    (Dataset::new(y, x, d).unwrap(), beta)
}

pub fn sparse_truth(d: usize, signal: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; d];
    b[..signal.len()].copy_from_slice(signal);
    b
}

pub fn scenario(beta0: Vec<f64>, n: usize, kind: ErrorKind, t: f64, seed: u64, reps: usize) -> SimScenario {
    let law = make_error_dist(kind, tau(t)).unwrap();
    SimScenario::new(beta0, n, law, seed, reps)
}

/// Minimum of the objective over the grid `{-5 + k·10⁻³}²` for `d = 2`.
///
/// The first coordinate is scanned exhaustively. For each value, the objective
/// in the second coordinate is linear plus concave between consecutive loss
/// kinks and between kinks and 0, so its grid minimum is attained at a grid
/// point adjacent to a kink, at 0, or at the range ends. Evaluating those
/// candidates gives the same value as scanning every grid point.
pub fn grid_min_2d(ds: &Dataset, tau: QuantileLevel, t: selo_qr::SeloTuning) -> (f64, [f64; 2]) {
    assert_eq!(ds.d(), 2);
    const H: f64 = 1e-3;
    const M: i64 = 10_000;
    let at = |k: i64| -5.0 + k as f64 * H;
    let n = ds.n();
    let q = tau.value();
    let rho = |u: f64| if u < 0.0 { u * (q - 1.0) } else { u * q };
    let pen = |b: f64| selo_qr::penalty_value(b, t);
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    let mut cand: Vec<i64> = Vec::with_capacity(6 * n + 12);
    let mut r = vec![0.0; n];
    for ka in 0..=M {
        let a = at(ka);
        for i in 0..n {
            r[i] = ds.y()[i] - ds.get(i, 0) * a;
        }
        cand.clear();
        cand.extend([0, M, 5000]);
        for i in 0..n {
            let xi = ds.get(i, 1);
            if xi != 0.0 {
                let k = ((r[i] / xi + 5.0) / H).floor() as i64;
                for c in k - 1..=k + 2 {
                    if (0..=M).contains(&c) {
                        cand.push(c);
                    }
                }
            }
        }
        let pa = pen(a);
        for &kb in &cand {
            let b = at(kb);
            let mut loss = 0.0;
            for i in 0..n {
                loss += rho(r[i] - ds.get(i, 1) * b);
            }
            let v = loss / (2.0 * n as f64) + pa + pen(b);
            if v < best.0 {
                best = (v, [a, b]);
            }
        }
    }
    best
}
