//! BIC-based choice of the tuning pair and of the model.
//!
//! For a fit `β̂` on `n` observations the criterion is
//!
//! ```text
//! BIC = log((1/n) Σ ρ_τ(yᵢ − xᵢᵀβ̂)) + (log n / n) · S_n · ‖β̂‖₀
//! ```
//!
//! `S_n` inflates the per-parameter charge when the dimension is large relative
//! to `log n`. Candidate models are capped at `s_n = ⌊c · n^a⌋` nonzeros with
//! `0 < a < 1/2`. [`select`] follows the practical recipe of fitting on the full
//! index set at every grid cell and reading the model off the fit's support;
//! [`fit_restricted`] and [`bic_ordering_check`] evaluate chosen index sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mean_loss, scaled_loss, Dataset, IndexSet, QuantileLevel};
use crate::penalty::SeloTuning;
use crate::solver::{fit, fit_path, FitConfig, FitResult, StartKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum SnPolicy {
    /// `1` when `d ≤ log n`, else `(d / log n) · log log max(n, 8)`.
    Auto,
    Fixed { value: f64 },
    /// `coef · n^exponent`.
    Formula { coef: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicConfig {
    pub sn_policy: SnPolicy,
    pub a_exponent: f64,
    pub c_cap: f64,
    pub loss_floor: f64,
    /// Strictly decreasing.
    pub lambda_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
}

impl Default for BicConfig {
    /// Policy defaults with empty grids; see [`BicConfig::with_default_grids`].
    fn default() -> Self {
        Self {
            sn_policy: SnPolicy::Auto,
            a_exponent: 0.4,
            c_cap: 1.0,
            loss_floor: 1e-12,
            lambda_grid: Vec::new(),
            gamma_grid: Vec::new(),
        }
    }
}

impl BicConfig {
    /// Default policy with the data-scaled default grids.
    pub fn with_default_grids(ds: &Dataset, tau: QuantileLevel) -> Self {
        Self {
            lambda_grid: default_lambda_grid(ds, tau),
            gamma_grid: default_gamma_grid(ds.n(), ds.d()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_exponent > 0.0 && self.a_exponent < 0.5) {
            return Err(Error::contract(format!(
                "a_exponent must lie in (0, 1/2), got {}",
                self.a_exponent
            )));
        }
        if !(self.c_cap > 0.0 && self.c_cap.is_finite()) {
            return Err(Error::contract("c_cap must be positive"));
        }
        if self.loss_floor.is_nan() || self.loss_floor <= 0.0 {
            return Err(Error::contract("loss_floor must be positive"));
        }
        match self.sn_policy {
            SnPolicy::Fixed { value } if !(value > 0.0 && value.is_finite()) => {
                return Err(Error::contract("fixed S_n must be positive"));
            }
            SnPolicy::Formula { coef, exponent } if !(coef > 0.0 && exponent.is_finite()) => {
                return Err(Error::contract("S_n formula needs coef > 0"));
            }
            _ => {}
        }
        if self.lambda_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::Usage("lambda and gamma grids must be nonempty".into()));
        }
        let positive = |g: &[f64]| g.iter().all(|&v| v > 0.0 && v.is_finite());
        if !positive(&self.lambda_grid) || !positive(&self.gamma_grid) {
            return Err(Error::Usage("grid values must be finite and positive".into()));
        }
        Ok(())
    }

    /// Cardinality cap `s_n = ⌊c · n^a⌋`.
    pub fn cap(&self, n: usize) -> usize {
        (self.c_cap * (n as f64).powf(self.a_exponent)).floor() as usize
    }
}

/// Ten log-spaced values from `q̂` down to `0.01·q̂`, where `q̂ = (1/n) Σ ρ_τ(yᵢ)`.
pub fn default_lambda_grid(ds: &Dataset, tau: QuantileLevel) -> Vec<f64> {
    let q = mean_loss(ds.y(), tau).max(f64::MIN_POSITIVE);
    (0..10)
        .map(|k| q * 10f64.powf(-2.0 * k as f64 / 9.0))
        .collect()
}

/// `{1, 10, 100} · √d · n^{-3/2}`.
pub fn default_gamma_grid(n: usize, d: usize) -> Vec<f64> {
    let base = (d as f64).sqrt() * (n as f64).powf(-1.5);
    vec![base, 10.0 * base, 100.0 * base]
}

/// The BIC inflation factor `S_n`.
pub fn sn_value(n: usize, d: usize, cfg: &BicConfig) -> Result<f64> {
    if n < 2 {
        return Err(Error::contract("S_n needs n >= 2"));
    }
    let ln_n = (n as f64).ln();
    Ok(match cfg.sn_policy {
        SnPolicy::Auto => {
            if d as f64 <= ln_n {
                1.0
            } else {
                (d as f64 / ln_n) * (n.max(8) as f64).ln().ln()
            }
        }
        SnPolicy::Fixed { value } => value,
        SnPolicy::Formula { coef, exponent } => coef * (n as f64).powf(exponent),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicScore {
    pub value: f64,
    pub mean_loss: f64,
    pub k_nonzero: usize,
    pub sn: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub n: usize,
    pub loss_floor: f64,
}

impl BicScore {
    pub fn from_parts(
        mean_loss: f64,
        k_nonzero: usize,
        n: usize,
        sn: f64,
        tuning: SeloTuning,
        loss_floor: f64,
    ) -> Self {
        let mut s = Self {
            value: 0.0,
            mean_loss,
            k_nonzero,
            sn,
            lambda: tuning.lambda,
            gamma: tuning.gamma,
            n,
            loss_floor,
        };
        s.value = s.recompute();
        s
    }

    /// The criterion evaluated from this score's own fields.
    pub fn recompute(&self) -> f64 {
        let n = self.n as f64;
        self.mean_loss.max(self.loss_floor).ln() + n.ln() / n * self.sn * self.k_nonzero as f64
    }
}

/// BIC of a fit produced on `ds`.
pub fn bic_score(
    ds: &Dataset,
    fit: &FitResult,
    tau: QuantileLevel,
    sn: f64,
    cfg: &BicConfig,
) -> Result<BicScore> {
    if fit.residuals.len() != ds.n() || fit.beta_hat.len() != ds.d() {
        return Err(Error::contract("fit does not match the dataset dimensions"));
    }
    Ok(BicScore::from_parts(
        mean_loss(&fit.residuals, tau),
        fit.nonzero_count(),
        ds.n(),
        sn,
        fit.tuning,
        cfg.loss_floor,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCell {
    pub lambda_index: usize,
    pub gamma_index: usize,
    pub start: StartKind,
    pub feasible: bool,
    pub score: BicScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub best: BicScore,
    pub beta_hat: Vec<f64>,
    pub active_set: IndexSet,
    pub scoreboard: Vec<ScoreCell>,
    pub excluded_count: usize,
    pub sn: f64,
    pub cap: usize,
    pub fit: FitResult,
}

/// Grid search for the BIC-optimal cell among fits with at most `s_n` nonzeros.
///
/// Ties in the criterion go to fewer nonzeros, then larger λ, then larger γ.
pub fn select(
    ds: &Dataset,
    tau: QuantileLevel,
    cfg: &BicConfig,
    fit_cfg: &FitConfig,
) -> Result<SelectionResult> {
    cfg.validate()?;
    let sn = sn_value(ds.n(), ds.d(), cfg)?;
    let cap = cfg.cap(ds.n());
    let path = fit_path(ds, tau, &cfg.lambda_grid, &cfg.gamma_grid, fit_cfg)?;

    let scoreboard: Vec<ScoreCell> = path
        .cells
        .iter()
        .map(|cell| {
            let score = bic_score(ds, &cell.fit, tau, sn, cfg)?;
            Ok(ScoreCell {
                lambda_index: cell.lambda_index,
                gamma_index: cell.gamma_index,
                start: cell.start,
                feasible: score.k_nonzero <= cap,
                score,
            })
        })
        .collect::<Result<_>>()?;
    let excluded_count = scoreboard.iter().filter(|c| !c.feasible).count();

    let best_idx = scoreboard
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible)
        .min_by(|(_, a), (_, b)| {
            a.score
                .value
                .total_cmp(&b.score.value)
                .then(a.score.k_nonzero.cmp(&b.score.k_nonzero))
                .then(b.score.lambda.total_cmp(&a.score.lambda))
                .then(b.score.gamma.total_cmp(&a.score.gamma))
        })
        .map(|(i, _)| i)
        .ok_or(Error::NoFeasibleModel {
            cap,
            cells: scoreboard.len(),
        })?;

    let fit = path.cells[best_idx].fit.clone();
    Ok(SelectionResult {
        best: scoreboard[best_idx].score,
        beta_hat: fit.beta_hat.clone(),
        active_set: fit.active_set.clone(),
        scoreboard,
        excluded_count,
        sn,
        cap,
        fit,
    })
}

/// Fits on the columns in `a` only and embeds the estimate in length `d`.
///
/// An empty set yields the zero model with residuals `y`.
pub fn fit_restricted(
    ds: &Dataset,
    a: &IndexSet,
    tau: QuantileLevel,
    t: SeloTuning,
    cfg: &FitConfig,
) -> Result<FitResult> {
    a.check_within(ds.d())?;
    if a.is_empty() {
        let obj = scaled_loss(ds.y(), tau);
        return Ok(FitResult {
            beta_hat: vec![0.0; ds.d()],
            active_set: IndexSet::empty(),
            objective: obj,
            outer_iters: 0,
            converged: true,
            residuals: ds.y().to_vec(),
            tuning: t,
            objective_trace: vec![obj],
            inner_sweeps: 0,
        });
    }
    let sub = ds.select_columns(a)?;
    let inner = fit(&sub, tau, t, cfg, None)?;
    let mut beta = vec![0.0; ds.d()];
    for (k, j) in a.iter().enumerate() {
        beta[j] = inner.beta_hat[k];
    }
    Ok(FitResult {
        active_set: IndexSet::support(&beta, cfg.zero_tol),
        beta_hat: beta,
        ..inner
    })
}

/// BIC values of restricted fits on the true set, an over-fitting superset
/// and an under-fitting set, for comparison by the caller.
#[allow(clippy::too_many_arguments)]
pub fn bic_ordering_check(
    ds: &Dataset,
    truth: &IndexSet,
    tau: QuantileLevel,
    t: SeloTuning,
    sn: f64,
    overfit: &IndexSet,
    underfit: &IndexSet,
    fit_cfg: &FitConfig,
    bic_cfg: &BicConfig,
) -> Result<(f64, f64, f64)> {
    if !(truth.is_subset(overfit) && overfit.len() > truth.len()) {
        return Err(Error::contract(
            "overfit set must strictly contain the true set",
        ));
    }
    if truth.is_subset(underfit) {
        return Err(Error::contract("underfit set must miss a true index"));
    }
    let cap = bic_cfg.cap(ds.n());
    for s in [truth, overfit, underfit] {
        s.check_within(ds.d())?;
        if s.len() > cap {
            return Err(Error::contract(format!(
                "index set of size {} exceeds the cap s_n = {cap}",
                s.len()
            )));
        }
    }
    let score = |a: &IndexSet| -> Result<f64> {
        let f = fit_restricted(ds, a, tau, t, fit_cfg)?;
        Ok(bic_score(ds, &f, tau, sn, bic_cfg)?.value)
    };
    Ok((score(truth)?, score(overfit)?, score(underfit)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sn_examples() {
        let cfg = BicConfig::default();
        assert_eq!(sn_value(1000, 5, &cfg).unwrap(), 1.0);
        let v = sn_value(100, 60, &cfg).unwrap();
        assert!((v - 19.898).abs() < 1e-3, "{v}");
        let fixed = BicConfig {
            sn_policy: SnPolicy::Fixed { value: 3.5 },
            ..BicConfig::default()
        };
        assert_eq!(sn_value(50, 400, &fixed).unwrap(), 3.5);
        assert!(sn_value(1, 1, &cfg).is_err());
    }

    #[test]
    fn score_hand_value() {
        let t = SeloTuning::new(1.0, 1.0).unwrap();
        let s = BicScore::from_parts(0.25, 2, 4, 1.0, t, 1e-12);
        assert!((s.value - (-0.693_147)).abs() < 1e-6, "{}", s.value);
        assert!((s.value - (0.25f64.ln() + 4f64.ln() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn floor_guards_perfect_fit() {
        let t = SeloTuning::new(1.0, 1.0).unwrap();
        let s = BicScore::from_parts(0.0, 1, 10, 1.0, t, 1e-12);
        assert!((s.value - (1e-12f64.ln() + 10f64.ln() / 10.0)).abs() < 1e-12);
    }

    #[test]
    fn cap_and_validation() {
        let mut cfg = BicConfig::default();
        assert_eq!(cfg.cap(800), 14);
        assert!(matches!(cfg.validate(), Err(Error::Usage(_))));
        cfg.lambda_grid = vec![1.0];
        cfg.gamma_grid = vec![0.1];
        assert!(cfg.validate().is_ok());
        cfg.a_exponent = 0.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_grids_shape() {
        let ds = Dataset::from_rows(
            vec![1.0, -1.0, 2.0, 0.5],
            &[vec![1.0], vec![0.5], vec![-1.0], vec![2.0]],
        )
        .unwrap();
        let tau = QuantileLevel::new(0.5).unwrap();
        let g = default_lambda_grid(&ds, tau);
        assert_eq!(g.len(), 10);
        let q = mean_loss(ds.y(), tau);
        assert!((g[0] - q).abs() < 1e-15);
        assert!((g[9] - 0.01 * q).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        let gg = default_gamma_grid(4, 1);
        assert!((gg[0] - 0.125).abs() < 1e-15);
    }
}
