use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use super::{generate, growth_dimension, Estimator, SimScenario};
use crate::error::{Error, Result};
use crate::inference::{confidence_interval, sigma_hat, standard_normal, standardized_stat, AsymptoticContext};
use crate::model::{Dataset, IndexSet};
use crate::selection::{select, BicConfig};
use crate::solver::{fit, FitConfig};

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub selected: IndexSet,
    pub true_positives: usize,
    pub false_positives: usize,
    pub exact: bool,
    pub l2_error: f64,
    pub z: Option<f64>,
    pub covered: Option<bool>,
    pub lambda: f64,
    pub gamma: f64,
    pub converged: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMetrics {
    pub reps: usize,
    pub failures: usize,
    pub exact_recovery_rate: f64,
    /// Pooled true-positive rate; `None` when the true support is empty.
    pub tpr: Option<f64>,
    /// Pooled false-positive rate; `None` when every coefficient is nonzero.
    pub fpr: Option<f64>,
    pub l2_errors: Vec<f64>,
    pub median_l2: f64,
    /// One standardized statistic per replication whose selected set contains
    /// the true support, direction `e₁` on that support.
    pub z_samples: Vec<f64>,
    pub z_skipped: usize,
    pub ks_to_normal: Option<f64>,
    pub ci_coverage: Option<f64>,
    pub bic_recovery_rate: Option<f64>,
    pub replications: Vec<ReplicationRecord>,
}

/// Runs every replication of the scenario on the current rayon pool.
pub fn run_replications(
    sc: &SimScenario,
    fit_cfg: &FitConfig,
    bic_cfg: &BicConfig,
) -> Result<OracleMetrics> {
    sc.validate()?;
    fit_cfg.validate()?;
    let records: Vec<ReplicationRecord> = (0..sc.reps)
        .into_par_iter()
        .map(|rep| run_one(sc, rep, fit_cfg, bic_cfg))
        .collect();
    aggregate(sc, records)
}

/// Like [`run_replications`] but for a subset of replication indices.
pub fn run_replications_with(
    sc: &SimScenario,
    reps: &[usize],
    fit_cfg: &FitConfig,
    bic_cfg: &BicConfig,
) -> Result<Vec<ReplicationRecord>> {
    sc.validate()?;
    if let Some(&r) = reps.iter().find(|&&r| r >= sc.reps) {
        return Err(Error::contract(format!("replication {r} out of range")));
    }
    Ok(reps
        .par_iter()
        .map(|&rep| run_one(sc, rep, fit_cfg, bic_cfg))
        .collect())
}

fn run_one(sc: &SimScenario, rep: usize, fit_cfg: &FitConfig, bic_cfg: &BicConfig) -> ReplicationRecord {
    let truth = sc.support();
    let failed = |msg: String| ReplicationRecord {
        rep,
        selected: IndexSet::empty(),
        true_positives: 0,
        false_positives: 0,
        exact: false,
        l2_error: f64::NAN,
        z: None,
        covered: None,
        lambda: f64::NAN,
        gamma: f64::NAN,
        converged: false,
        failure: Some(msg),
    };
    let (ds, _) = match generate(sc, rep) {
        Ok(v) => v,
        Err(e) => return failed(e.to_string()),
    };
    let tau = sc.error.tau;
    let estimate = match sc.estimator {
        Estimator::FixedTuning => fit(&ds, tau, sc.fixed_tuning(), fit_cfg, None),
        Estimator::Bic => {
            let mut cfg = bic_cfg.clone();
            if cfg.lambda_grid.is_empty() {
                cfg.lambda_grid = crate::selection::default_lambda_grid(&ds, tau);
            }
            if cfg.gamma_grid.is_empty() {
                cfg.gamma_grid = crate::selection::default_gamma_grid(ds.n(), ds.d());
            }
            select(&ds, tau, &cfg, fit_cfg).map(|s| s.fit)
        }
    };
    let fitted = match estimate {
        Ok(f) => f,
        Err(e) => return failed(e.to_string()),
    };

    let selected = fitted.active_set.clone();
    let true_positives = truth.iter().filter(|&j| selected.contains(j)).count();
    let false_positives = selected.len() - true_positives;
    let l2_error = fitted
        .beta_hat
        .iter()
        .zip(&sc.beta0)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();

    let (z, covered) = if !truth.is_empty() && truth.is_subset(&selected) {
        match oracle_statistic(sc, &ds, &truth, &fitted.beta_hat) {
            Ok((z, c)) => (Some(z), Some(c)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };

    ReplicationRecord {
        rep,
        exact: selected == truth,
        selected,
        true_positives,
        false_positives,
        l2_error,
        z,
        covered,
        lambda: fitted.tuning.lambda,
        gamma: fitted.tuning.gamma,
        converged: fitted.converged,
        failure: None,
    }
}

/// `Z` with the analytic `f(0)` and `u = e₁`, plus whether the interval covers `u'β⁰`.
fn oracle_statistic(sc: &SimScenario, ds: &Dataset, truth: &IndexSet, beta_hat: &[f64]) -> Result<(f64, bool)> {
    let sigma = sigma_hat(ds, truth)?;
    let mut u = vec![0.0; truth.len()];
    u[0] = 1.0;
    let ctx = AsymptoticContext::new(sigma, sc.error.f0, sc.error.tau, ds.n(), u)?;
    let b_hat = truth.gather(beta_hat);
    let b0 = truth.gather(&sc.beta0);
    let z = standardized_stat(&ctx, &b_hat, &b0)?;
    let ci = confidence_interval(&ctx, &b_hat, sc.ci_level)?;
    Ok((z, ci.contains(b0[0])))
}

fn aggregate(sc: &SimScenario, records: Vec<ReplicationRecord>) -> Result<OracleMetrics> {
    let failures: Vec<&ReplicationRecord> = records.iter().filter(|r| r.failure.is_some()).collect();
    if failures.len() * 10 > sc.reps {
        return Err(Error::ScenarioFailed {
            failed: failures.len(),
            reps: sc.reps,
            first: failures[0].failure.clone().unwrap_or_default(),
        });
    }
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| r.failure.is_none()).collect();
    let m = ok.len() as f64;
    let truth_len = sc.support().len();
    let negatives = sc.d - truth_len;

    let exact_recovery_rate = ok.iter().filter(|r| r.exact).count() as f64 / m;
    let tp: usize = ok.iter().map(|r| r.true_positives).sum();
    let fp: usize = ok.iter().map(|r| r.false_positives).sum();
    let tpr = (truth_len > 0).then(|| tp as f64 / (truth_len as f64 * m));
    let fpr = (negatives > 0).then(|| fp as f64 / (negatives as f64 * m));

    let l2_errors: Vec<f64> = ok.iter().map(|r| r.l2_error).collect();
    let median_l2 = median(&l2_errors);

    let z_samples: Vec<f64> = ok.iter().filter_map(|r| r.z).collect();
    let z_skipped = ok.len() - z_samples.len();
    let ks_to_normal = (!z_samples.is_empty()).then(|| ks_distance(&z_samples)).transpose()?;
    let covered: Vec<bool> = ok.iter().filter_map(|r| r.covered).collect();
    let ci_coverage =
        (!covered.is_empty()).then(|| covered.iter().filter(|&&c| c).count() as f64 / covered.len() as f64);

    Ok(OracleMetrics {
        reps: sc.reps,
        failures: failures.len(),
        exact_recovery_rate,
        tpr,
        fpr,
        median_l2,
        l2_errors,
        z_samples,
        z_skipped,
        ks_to_normal,
        ci_coverage,
        bic_recovery_rate: (sc.estimator == Estimator::Bic).then_some(exact_recovery_rate),
        replications: records,
    })
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// Kolmogorov–Smirnov distance `sup_x |F̂(x) − Φ(x)|` to the standard normal.
pub fn ks_distance(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::contract("KS distance needs at least one sample"));
    }
    let mut s = samples.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let m = s.len() as f64;
    let phi = standard_normal();
    Ok(s.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = phi.cdf(x);
        acc.max((i + 1) as f64 / m - f).max(f - i as f64 / m)
    }))
}

/// One rung of the convergence-rate ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub d: usize,
    pub alpha_n: f64,
    pub median_l2: f64,
    pub exact_recovery_rate: f64,
}

impl RatePoint {
    /// Runs `base` resized to `n` with `d = ⌊2 n^{0.4}⌋`.
    pub fn measure(base: &SimScenario, n: usize, fit_cfg: &FitConfig, bic_cfg: &BicConfig) -> Result<(Self, OracleMetrics)> {
        let d = growth_dimension(n);
        let sc = base.resized(n, d);
        let m = super::run_replications(&sc, fit_cfg, bic_cfg)?;
        Ok((
            Self {
                n,
                d,
                alpha_n: (d as f64 / n as f64).sqrt(),
                median_l2: m.median_l2,
                exact_recovery_rate: m.exact_recovery_rate,
            },
            m,
        ))
    }
}

/// Least-squares slope of `log median_l2` on `log α_n`.
pub fn log_log_slope(points: &[RatePoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.alpha_n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_l2.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[0.0]).unwrap(), 0.5);
        let phi = standard_normal();
        let q: Vec<f64> = (1..=100).map(|i| phi.inverse_cdf((i as f64 - 0.5) / 100.0)).collect();
        assert!((ks_distance(&q).unwrap() - 0.005).abs() < 1e-9);
        let far = ks_distance(&[10.0; 5]).unwrap();
        assert!((far - 1.0).abs() < 1e-12);
        assert!(ks_distance(&[]).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<RatePoint> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&a: &f64| RatePoint {
                n: 0,
                d: 0,
                alpha_n: a,
                median_l2: 3.0 * a.powf(1.1),
                exact_recovery_rate: 1.0,
            })
            .collect();
        assert!((log_log_slope(&pts).unwrap() - 1.1).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
