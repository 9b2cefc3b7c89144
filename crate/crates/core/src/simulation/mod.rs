//! Data generation and Monte Carlo checks of the estimator's large-sample
//! behaviour: support recovery, the `√(d/n)` error rate, and normality of the
//! standardized statistic.
//!
//! Replication `r` of a scenario with seed `s` draws from the ChaCha stream
//! `(s, r)`, so replications are independent of execution order and of the
//! number of worker threads.

mod distribution;
mod metrics;

pub use distribution::{make_error_dist, ErrorDistribution, ErrorKind};
pub use metrics::{
    ks_distance, log_log_slope, run_replications, run_replications_with, OracleMetrics, RatePoint,
    ReplicationRecord,
};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, IndexSet};
use crate::penalty::SeloTuning;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Design {
    GaussianIid,
    /// AR(1) columns: `corr(x_j, x_k) = ρ^|j−k|`.
    GaussianCorrelated { rho: f64 },
}

/// How each replication is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// One fit at the scenario's tuning pair.
    FixedTuning,
    /// BIC grid selection.
    Bic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub n: usize,
    pub d: usize,
    pub beta0: Vec<f64>,
    pub error: ErrorDistribution,
    pub design: Design,
    pub seed: u64,
    pub reps: usize,
    pub estimator: Estimator,
    /// Tuning for [`Estimator::FixedTuning`]; `None` uses [`default_tuning`].
    pub tuning: Option<SeloTuning>,
    /// Multiplier on the default λ.
    pub lambda_scale: f64,
    pub ci_level: f64,
}

impl SimScenario {
    pub fn new(beta0: Vec<f64>, n: usize, error: ErrorDistribution, seed: u64, reps: usize) -> Self {
        Self {
            n,
            d: beta0.len(),
            beta0,
            error,
            design: Design::GaussianIid,
            seed,
            reps,
            estimator: Estimator::FixedTuning,
            tuning: None,
            lambda_scale: 1.0,
            ci_level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta0.len() != self.d {
            return Err(Error::contract(format!(
                "beta0 has length {}, scenario has d = {}",
                self.beta0.len(),
                self.d
            )));
        }
        if self.d == 0 || self.n < 2 || self.d >= self.n {
            return Err(Error::contract(format!(
                "scenario needs 1 <= d < n and n >= 2 (n = {}, d = {})",
                self.n, self.d
            )));
        }
        if self.beta0.iter().any(|b| !b.is_finite()) {
            return Err(Error::contract("beta0 must be finite"));
        }
        if self.reps == 0 {
            return Err(Error::contract("reps must be at least 1"));
        }
        if let Design::GaussianCorrelated { rho } = self.design {
            if !(rho > -1.0 && rho < 1.0) {
                return Err(Error::contract("design correlation must lie in (-1, 1)"));
            }
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::contract("ci_level must lie in (0, 1)"));
        }
        if !(self.lambda_scale > 0.0 && self.lambda_scale.is_finite()) {
            return Err(Error::contract("lambda_scale must be positive"));
        }
        Ok(())
    }

    /// `𝒜⁰ = {j : β⁰_j ≠ 0}`.
    pub fn support(&self) -> IndexSet {
        IndexSet::support(&self.beta0, 0.0)
    }

    /// Smallest nonzero `|β⁰_j|`, or `None` for the null model.
    pub fn min_signal(&self) -> Option<f64> {
        self.beta0
            .iter()
            .filter(|b| **b != 0.0)
            .map(|b| b.abs())
            .min_by(f64::total_cmp)
    }

    pub fn fixed_tuning(&self) -> SeloTuning {
        self.tuning
            .unwrap_or_else(|| default_tuning(self.n, self.d, self.lambda_scale))
    }

    /// The same scenario at another size; `β⁰` is truncated or zero-padded.
    pub fn resized(&self, n: usize, d: usize) -> Self {
        let mut beta0 = self.beta0.clone();
        beta0.resize(d, 0.0);
        Self {
            n,
            d,
            beta0,
            ..self.clone()
        }
    }
}

/// `λ = 0.5 · √(log max(d, 2) / n) · scale`, `γ = √d · n^{-3/2}`.
pub fn default_tuning(n: usize, d: usize, scale: f64) -> SeloTuning {
    let (nf, df) = (n as f64, d as f64);
    SeloTuning {
        lambda: 0.5 * ((df.max(2.0)).ln() / nf).sqrt() * scale,
        gamma: df.sqrt() * nf.powf(-1.5),
    }
}

/// Dimension growth rule `d_n = ⌊2 n^{0.4}⌋`.
pub fn growth_dimension(n: usize) -> usize {
    (2.0 * (n as f64).powf(0.4)).floor() as usize
}

/// The RNG stream of replication `rep`.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Draws replication `rep`: returns the dataset and the error vector.
pub fn generate(sc: &SimScenario, rep: usize) -> Result<(Dataset, Vec<f64>)> {
    sc.validate()?;
    if rep >= sc.reps {
        return Err(Error::contract(format!(
            "replication {rep} out of range for {} reps",
            sc.reps
        )));
    }
    let mut rng = replication_rng(sc.seed, rep);
    let (n, d) = (sc.n, sc.d);
    let mut x = Vec::with_capacity(n * d);
    for _ in 0..n {
        match sc.design {
            Design::GaussianIid => {
                for _ in 0..d {
                    x.push(StandardNormal.sample(&mut rng));
                }
            }
            Design::GaussianCorrelated { rho } => {
                let c = (1.0 - rho * rho).sqrt();
                let mut prev: f64 = StandardNormal.sample(&mut rng);
                x.push(prev);
                for _ in 1..d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    prev = rho * prev + c * z;
                    x.push(prev);
                }
            }
        }
    }
    let eps: Vec<f64> = (0..n).map(|_| sc.error.sample(&mut rng)).collect();
    let y = (0..n)
        .map(|i| {
            let row = &x[i * d..(i + 1) * d];
            row.iter().zip(&sc.beta0).map(|(a, b)| a * b).sum::<f64>() + eps[i]
        })
        .collect();
    Ok((Dataset::new(y, x, d)?, eps))
}

/// Empirical counterparts of the design conditions: eigenvalue bounds of
/// `n⁻¹ Σ xᵢxᵢᵀ`, the largest row norm, and `α_n = √(d/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub d: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub max_row_norm: f64,
    pub alpha_n: f64,
    /// `max_row_norm · α_n`; should be small.
    pub a3_ratio: f64,
}

pub fn assumption_report(ds: &Dataset) -> AssumptionReport {
    let (n, d) = (ds.n(), ds.d());
    let x = DMatrix::from_row_slice(n, d, ds.x());
    let gram = (x.transpose() * &x) / n as f64;
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let lambda_max = eig.max().max(0.0);
    let lambda_min = eig.min().clamp(0.0, lambda_max);
    let max_row_norm = (0..n)
        .map(|i| ds.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let alpha_n = (d as f64 / n as f64).sqrt();
    AssumptionReport {
        n,
        d,
        lambda_min,
        lambda_max,
        max_row_norm,
        alpha_n,
        a3_ratio: max_row_norm * alpha_n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuantileLevel;

    fn normal_scenario(beta0: Vec<f64>, n: usize) -> SimScenario {
        let tau = QuantileLevel::new(0.5).unwrap();
        let e = make_error_dist(ErrorKind::Normal { sigma: 1.0 }, tau).unwrap();
        SimScenario::new(beta0, n, e, 42, 3)
    }

    #[test]
    fn generation_is_deterministic() {
        let sc = normal_scenario(vec![1.0, 0.0, -1.0], 50);
        let (a, ea) = generate(&sc, 1).unwrap();
        let (b, eb) = generate(&sc, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(ea, eb);
        let (c, _) = generate(&sc, 2).unwrap();
        assert_ne!(a, c);
        assert!(generate(&sc, 3).is_err());
    }

    #[test]
    fn null_signal_gives_pure_noise() {
        let sc = normal_scenario(vec![0.0; 4], 30);
        let (ds, eps) = generate(&sc, 0).unwrap();
        assert_eq!(ds.y(), eps.as_slice());
    }

    #[test]
    fn report_hand_values() {
        let ds = Dataset::from_rows(vec![0.0, 0.0], &[vec![1.0], vec![1.0]]).unwrap();
        let r = assumption_report(&ds);
        assert!((r.lambda_min - 1.0).abs() < 1e-12);
        assert!((r.lambda_max - 1.0).abs() < 1e-12);
        assert_eq!(r.max_row_norm, 1.0);
        assert_eq!(r.alpha_n, 0.5f64.sqrt());
    }

    #[test]
    fn report_identity_gram() {
        // rows ±√2 e_j give Gram = I for n = 4, d = 2
        let s = 2f64.sqrt();
        let ds = Dataset::from_rows(
            vec![0.0; 4],
            &[vec![s, 0.0], vec![-s, 0.0], vec![0.0, s], vec![0.0, -s]],
        )
        .unwrap();
        let r = assumption_report(&ds);
        assert!((r.lambda_min - 1.0).abs() < 1e-12);
        assert!((r.lambda_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_helpers() {
        let sc = normal_scenario(vec![2.0, 0.0, -0.5, 0.0], 40);
        assert_eq!(sc.support().as_slice(), &[0, 2]);
        assert_eq!(sc.min_signal(), Some(0.5));
        let big = sc.resized(100, 6);
        assert_eq!(big.beta0, vec![2.0, 0.0, -0.5, 0.0, 0.0, 0.0]);
        assert_eq!(growth_dimension(100), 12);
        assert_eq!(growth_dimension(800), 28);
        let bad = normal_scenario(vec![1.0; 5], 5);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn correlated_design_shape() {
        let mut sc = normal_scenario(vec![0.0; 3], 4000);
        sc.reps = 1;
        sc.design = Design::GaussianCorrelated { rho: 0.5 };
        let (ds, _) = generate(&sc, 0).unwrap();
        let c0 = ds.column(0);
        let c1 = ds.column(1);
        let c2 = ds.column(2);
        let corr = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / 4000.0;
        assert!((corr(&c0, &c1) - 0.5).abs() < 0.05);
        assert!((corr(&c0, &c2) - 0.25).abs() < 0.05);
    }
}
