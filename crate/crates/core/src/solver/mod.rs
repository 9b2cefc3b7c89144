//! Computing the penalized quantile estimator.
//!
//! The objective `Q(β)` is a convex piecewise-linear loss plus a penalty that
//! is concave in each `|βⱼ|`. Each outer iteration replaces the penalty by its
//! tangent at the current iterate (local linear approximation). The result is
//! a weighted-L1 quantile problem that majorizes `Q`, and it is decreased by
//! cyclic coordinate descent with exact one-dimensional updates. Every outer
//! step therefore cannot increase `Q`.
//!
//! The tangent weight at an exact zero is `(λ / log 2) / γ`, which is huge when
//! γ is small, so the majorization alone never re-opens a zero coordinate.
//! When the outer loop stalls, a polishing sweep minimizes `Q` itself along
//! each coordinate globally (see [`coordinate`]). It moves a coordinate only
//! when that strictly lowers `Q`, so descent is preserved.
//!
//! Any practical solver returns a local minimizer of the nonconvex objective.
//! No global optimality is claimed.

pub mod coordinate;
mod path;

pub use coordinate::coordinate_min;
pub use path::{fit_path, PathCell, PathResult, StartKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_loss, Dataset, IndexSet, QuantileLevel};
use crate::penalty::{penalty_derivative, penalty_total, penalty_value, SeloTuning};

use coordinate::{line_global_min, loss_along, selo_global_min, weighted_l1_min};

/// Inner sweeps stop once no coefficient moves more than this times the
/// largest coefficient magnitude.
const INNER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    Zeros,
    /// One weighted-L1 solve from zero with constant weight `min(λ, (λ / log 2) / γ)`.
    L1Warm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_outer: usize,
    pub max_sweeps: usize,
    /// Relative objective decrease below which the outer loop stops.
    pub obj_tol: f64,
    /// Coefficients with magnitude at most this are reported as zero.
    pub zero_tol: f64,
    pub init: InitStrategy,
    /// Escape moves after convergence: zero each active coefficient in turn,
    /// and search along kinks of the loss; strict improvements are kept.
    #[serde(default = "default_true")]
    pub escape: bool,
    /// Escape moves are skipped above this sample size, where their cost
    /// dominates the fit and the gains are at rounding level.
    #[serde(default = "default_escape_max_n")]
    pub escape_max_n: usize,
}

fn default_true() -> bool {
    true
}

fn default_escape_max_n() -> usize {
    400
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_outer: 30,
            max_sweeps: 200,
            obj_tol: 1e-8,
            zero_tol: 1e-8,
            init: InitStrategy::L1Warm,
            escape: true,
            escape_max_n: default_escape_max_n(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 || self.max_sweeps == 0 {
            return Err(Error::contract("iteration limits must be at least 1"));
        }
        if !(self.obj_tol > 0.0 && self.zero_tol > 0.0) {
            return Err(Error::contract("tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub active_set: IndexSet,
    /// `Q(β̂)`.
    pub objective: f64,
    pub outer_iters: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
    pub tuning: SeloTuning,
    /// Objective after the start point and after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub inner_sweeps: usize,
}

impl FitResult {
    /// `‖β̂‖₀` under the zero tolerance.
    pub fn nonzero_count(&self) -> usize {
        self.active_set.len()
    }
}

/// LLA weights `wⱼ = p'(|βⱼ|)`.
pub fn lla_weights(beta: &[f64], t: SeloTuning) -> Vec<f64> {
    beta.iter().map(|&b| penalty_derivative(b, t)).collect()
}

/// Fits the penalized quantile regression at one tuning pair.
///
/// `init`, when given, replaces the configured start strategy.
pub fn fit(
    ds: &Dataset,
    tau: QuantileLevel,
    tuning: SeloTuning,
    cfg: &FitConfig,
    init: Option<&[f64]>,
) -> Result<FitResult> {
    cfg.validate()?;
    let problem = Problem::new(ds, tau);
    let start = match init {
        Some(b) => {
            ds.check_beta(b)?;
            let mut b = b.to_vec();
            problem.clear_dead(&mut b);
            b
        }
        None => problem.start(tuning, cfg),
    };
    problem.solve(start, tuning, cfg)
}

/// Replaces `best` by `other` when it is strictly lower; the trace of `best`
/// is kept and extended by the new value so it stays monotone.
fn improve(best: &mut FitResult, other: FitResult) -> bool {
    if other.objective < best.objective - 1e-12 * best.objective.abs() {
        let mut trace = std::mem::take(&mut best.objective_trace);
        trace.push(other.objective);
        *best = FitResult {
            objective_trace: trace,
            outer_iters: best.outer_iters + other.outer_iters,
            inner_sweeps: best.inner_sweeps + other.inner_sweeps,
            ..other
        };
        true
    } else {
        false
    }
}

/// Rounds a coefficient that a line search drove to zero up to rounding.
fn snap(value: f64, previous: f64) -> f64 {
    if value.abs() <= 1e-13 * previous.abs() {
        0.0
    } else {
        value
    }
}

/// Column-major view of a dataset plus scratch space for the sweeps.
pub(crate) struct Problem<'a> {
    ds: &'a Dataset,
    cols: Vec<Vec<f64>>,
    dead: Vec<bool>,
    tau: f64,
    level: QuantileLevel,
    inv2n: f64,
    /// `max |yᵢ|`; residuals below `1e-10` of it count as zero.
    y_scale: f64,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(ds: &'a Dataset, tau: QuantileLevel) -> Self {
        let cols: Vec<Vec<f64>> = (0..ds.d()).map(|j| ds.column(j)).collect();
        let dead = cols.iter().map(|c| c.iter().all(|&v| v == 0.0)).collect();
        Self {
            ds,
            cols,
            dead,
            tau: tau.value(),
            level: tau,
            inv2n: 0.5 / ds.n() as f64,
            y_scale: ds.y().iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    fn clear_dead(&self, beta: &mut [f64]) {
        for (b, &dead) in beta.iter_mut().zip(&self.dead) {
            if dead {
                *b = 0.0;
            }
        }
    }

    fn start(&self, tuning: SeloTuning, cfg: &FitConfig) -> Vec<f64> {
        let d = self.ds.d();
        let mut beta = vec![0.0; d];
        if cfg.init == InitStrategy::L1Warm {
            let w = tuning.lambda.min(tuning.max_weight());
            let weights = vec![w; d];
            let mut resid = self.ds.y().to_vec();
            self.inner_cd(&mut beta, &mut resid, &weights, cfg.max_sweeps);
        }
        beta
    }

    fn residuals(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.ds.y().to_vec();
        for (col, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (ri, &x) in r.iter_mut().zip(col) {
                    *ri -= x * b;
                }
            }
        }
        r
    }

    fn objective(&self, beta: &[f64], resid: &[f64], tuning: SeloTuning) -> f64 {
        let loss: f64 = resid.iter().map(|&r| check_loss(r, self.level)).sum();
        loss * self.inv2n + penalty_total(beta, tuning)
    }

    /// Cyclic coordinate descent on the weighted-L1 surrogate; returns sweeps used.
    fn inner_cd(
        &self,
        beta: &mut [f64],
        resid: &mut [f64],
        weights: &[f64],
        max_sweeps: usize,
    ) -> usize {
        let mut partial = vec![0.0; resid.len()];
        let mut buf = Vec::with_capacity(resid.len() + 1);
        for sweep in 1..=max_sweeps {
            let mut max_change: f64 = 0.0;
            for (j, col) in self.cols.iter().enumerate() {
                if self.dead[j] {
                    continue;
                }
                let old = beta[j];
                let r: &[f64] = if old == 0.0 {
                    resid
                } else {
                    for ((p, &ri), &x) in partial.iter_mut().zip(resid.iter()).zip(col) {
                        *p = ri + x * old;
                    }
                    &partial
                };
                let new = weighted_l1_min(r, col, self.tau, self.inv2n, weights[j], &mut buf);
                if new != old {
                    if old == 0.0 {
                        for (ri, &x) in resid.iter_mut().zip(col) {
                            *ri -= x * new;
                        }
                    } else {
                        for ((ri, &p), &x) in resid.iter_mut().zip(&partial).zip(col) {
                            *ri = p - x * new;
                        }
                    }
                    beta[j] = new;
                    max_change = max_change.max((new - old).abs());
                }
            }
            let size = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            if max_change <= INNER_TOL * size {
                return sweep;
            }
        }
        max_sweeps
    }

    /// One pass of global 1-D minimization of the full objective along each
    /// coordinate, skipping `frozen`. Only strict improvements are taken.
    fn polish(&self, beta: &mut [f64], resid: &mut [f64], tuning: SeloTuning, frozen: Option<usize>) {
        let mut partial = vec![0.0; resid.len()];
        let mut buf = Vec::with_capacity(resid.len() + 1);
        for (j, col) in self.cols.iter().enumerate() {
            if self.dead[j] || frozen == Some(j) {
                continue;
            }
            let old = beta[j];
            for ((p, &ri), &x) in partial.iter_mut().zip(resid.iter()).zip(col) {
                *p = ri + x * old;
            }
            let (cand, _) = selo_global_min(&partial, col, self.tau, self.inv2n, tuning, &mut buf);
            if cand == old {
                continue;
            }
            let current = loss_along(&partial, col, self.tau, self.inv2n, old) + penalty_value(old, tuning);
            let proposed =
                loss_along(&partial, col, self.tau, self.inv2n, cand) + penalty_value(cand, tuning);
            if proposed < current - 1e-15 * current.abs() {
                beta[j] = cand;
                for ((ri, &p), &x) in resid.iter_mut().zip(&partial).zip(col) {
                    *ri = p - x * cand;
                }
            }
        }
    }

    /// [`Problem::run`] followed by escape moves when enabled.
    ///
    /// LLA and the coordinate polish move one coefficient at a time and can
    /// stall where the objective only decreases along a joint move. Two
    /// kinds of joint move are tried: zeroing one active coefficient while the
    /// others are re-polished, and exact line searches along loss kinks.
    pub(crate) fn solve(&self, beta: Vec<f64>, tuning: SeloTuning, cfg: &FitConfig) -> Result<FitResult> {
        let mut best = self.run(beta, tuning, cfg)?;
        if !cfg.escape || self.ds.n() > cfg.escape_max_n {
            return Ok(best);
        }
        for _ in 0..self.cols.len() {
            let mut improved = false;
            for j in best.active_set.clone().iter() {
                let mut trial = best.beta_hat.clone();
                trial[j] = 0.0;
                let mut resid = self.residuals(&trial);
                self.polish(&mut trial, &mut resid, tuning, Some(j));
                if improve(&mut best, self.run(trial, tuning, cfg)?) {
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        for _ in 0..cfg.max_outer {
            let mut beta = best.beta_hat.clone();
            let mut resid = best.residuals.clone();
            if !self.kink_moves(&mut beta, &mut resid, tuning) {
                break;
            }
            if !improve(&mut best, self.run(beta, tuning, cfg)?) {
                break;
            }
        }
        Ok(best)
    }

    /// Exact line searches along directions that keep one zero residual at
    /// zero while moving an active coefficient together with one other
    /// coordinate. Coordinate descent on the check loss can stall at such
    /// kinks. Returns whether any move was taken.
    fn kink_moves(&self, beta: &mut [f64], resid: &mut [f64], tuning: SeloTuning) -> bool {
        let n = resid.len();
        let eps = 1e-10 * self.y_scale;
        let zeros: Vec<usize> = (0..n).filter(|&i| resid[i].abs() <= eps).collect();
        let mut v = vec![0.0; n];
        let mut buf = Vec::with_capacity(n + 3);
        let mut moved = false;
        for &i in &zeros {
            if resid[i].abs() > eps {
                continue;
            }
            for j in 0..beta.len() {
                if beta[j] == 0.0 || self.dead[j] {
                    continue;
                }
                for k in 0..beta.len() {
                    if k == j || self.dead[k] {
                        continue;
                    }
                    let (dj, dk) = (self.cols[k][i], -self.cols[j][i]);
                    if dj == 0.0 && dk == 0.0 {
                        continue;
                    }
                    for ((vl, &xj), &xk) in v.iter_mut().zip(&self.cols[j]).zip(&self.cols[k]) {
                        *vl = xj * dj + xk * dk;
                    }
                    let (bj, bk) = (beta[j], beta[k]);
                    let pen = |s: f64| penalty_value(bj + s * dj, tuning) + penalty_value(bk + s * dk, tuning);
                    let extra = [-bj / dj, -bk / dk];
                    let (s, _) = line_global_min(resid, &v, self.tau, self.inv2n, &extra, pen, &mut buf);
                    if s == 0.0 {
                        continue;
                    }
                    let current = loss_along(resid, &v, self.tau, self.inv2n, 0.0) + pen(0.0);
                    let proposed = loss_along(resid, &v, self.tau, self.inv2n, s) + pen(s);
                    if proposed < current - 1e-15 * current.abs() {
                        beta[j] = snap(bj + s * dj, bj);
                        beta[k] = snap(bk + s * dk, bk);
                        for (rl, &vl) in resid.iter_mut().zip(&v) {
                            *rl -= s * vl;
                        }
                        moved = true;
                    }
                }
            }
        }
        moved
    }

    pub(crate) fn run(
        &self,
        mut beta: Vec<f64>,
        tuning: SeloTuning,
        cfg: &FitConfig,
    ) -> Result<FitResult> {
        let mut resid = self.residuals(&beta);
        let mut obj = self.objective(&beta, &resid, tuning);
        if !obj.is_finite() {
            return Err(Error::Numerical {
                iteration: 0,
                message: "non-finite objective at the start point".into(),
            });
        }
        let mut trace = vec![obj];
        let mut converged = false;
        let mut outer = 0;
        let mut sweeps = 0;
        let mut candidate = beta.clone();

        while outer < cfg.max_outer {
            outer += 1;
            let weights = lla_weights(&beta, tuning);
            candidate.copy_from_slice(&beta);
            let mut cand_resid = resid.clone();
            sweeps += self.inner_cd(&mut candidate, &mut cand_resid, &weights, cfg.max_sweeps);
            let mut cand_resid = self.residuals(&candidate);
            let mut cand_obj = self.objective(&candidate, &cand_resid, tuning);
            if !cand_obj.is_finite() {
                return Err(Error::Numerical {
                    iteration: outer,
                    message: "objective became non-finite".into(),
                });
            }
            if cand_obj > obj {
                // rounding-level increase: keep the previous iterate
                candidate.copy_from_slice(&beta);
                cand_resid.copy_from_slice(&resid);
                cand_obj = obj;
            }
            let mut decrease = obj - cand_obj;
            if decrease <= cfg.obj_tol * obj.abs() {
                self.polish(&mut candidate, &mut cand_resid, tuning, None);
                cand_resid = self.residuals(&candidate);
                let polished = self.objective(&candidate, &cand_resid, tuning);
                if polished <= cand_obj {
                    cand_obj = polished;
                } else {
                    candidate.copy_from_slice(&beta);
                    cand_resid.copy_from_slice(&resid);
                    cand_obj = obj;
                }
                decrease = obj - cand_obj;
                converged = decrease <= cfg.obj_tol * obj.abs();
            }
            std::mem::swap(&mut beta, &mut candidate);
            resid = cand_resid;
            obj = cand_obj;
            trace.push(obj);
            if converged {
                break;
            }
        }

        Ok(FitResult {
            active_set: IndexSet::support(&beta, cfg.zero_tol),
            beta_hat: beta,
            objective: obj,
            outer_iters: outer,
            converged,
            residuals: resid,
            tuning,
            objective_trace: trace,
            inner_sweeps: sweeps,
        })
    }
}
