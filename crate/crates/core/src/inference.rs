//! Normal-approximation inference for the coefficients on a known support.
//!
//! On the event that the support is recovered, for a unit direction `u`
//!
//! ```text
//! Z = √n · f(0) · uᵀ(β̂_A − β⁰_A) / √(τ(1−τ) · uᵀ Σ_A⁻¹ u)  →  N(0, 1)
//! ```
//!
//! with `Σ_A = n⁻¹ Σᵢ x_{i,A} x_{i,A}ᵀ` and `f(0)` the error density at its
//! τ-quantile. `Σ_A⁻¹` is only ever applied through a Cholesky solve.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{Dataset, IndexSet, QuantileLevel};

/// Eigenvalue ratio below which a Gram matrix is treated as singular.
pub const SINGULAR_RATIO: f64 = 1e-10;

/// `Σ_A` together with its extreme eigenvalues and a singularity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub singular: bool,
}

impl GramMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::contract("Gram matrix must be square and nonempty"));
        }
        let k = matrix.nrows();
        for i in 0..k {
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-10 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::contract("Gram matrix is not symmetric"));
                }
            }
        }
        let eig = SymmetricEigen::new(matrix.clone()).eigenvalues;
        let min = eig.min();
        let max = eig.max();
        Ok(Self {
            singular: !(max > 0.0 && min > SINGULAR_RATIO * max),
            min_eigenvalue: min,
            max_eigenvalue: max,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn cholesky(&self) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        let refuse = || Error::Singular {
            min_eigenvalue: self.min_eigenvalue,
            max_eigenvalue: self.max_eigenvalue,
        };
        if self.singular {
            return Err(refuse());
        }
        Cholesky::new(self.matrix.clone()).ok_or_else(refuse)
    }

    /// `uᵀ Σ⁻¹ u` through a linear solve.
    pub fn inverse_quadratic_form(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::contract("direction length does not match Σ"));
        }
        let chol = self.cholesky()?;
        let u = DVector::from_column_slice(u);
        let v = chol.solve(&u);
        Ok(u.dot(&v))
    }
}

/// `Σ_A = n⁻¹ Σᵢ x_{i,A} x_{i,A}ᵀ`.
pub fn sigma_hat(ds: &Dataset, a: &IndexSet) -> Result<GramMatrix> {
    if a.is_empty() {
        return Err(Error::contract("Σ_A needs a nonempty index set"));
    }
    a.check_within(ds.d())?;
    let k = a.len();
    let idx = a.as_slice();
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..ds.n() {
        let row = ds.row(i);
        for p in 0..k {
            let xp = row[idx[p]];
            for q in 0..=p {
                m[(p, q)] += xp * row[idx[q]];
            }
        }
    }
    let n = ds.n() as f64;
    for p in 0..k {
        for q in 0..=p {
            let v = m[(p, q)] / n;
            m[(p, q)] = v;
            m[(q, p)] = v;
        }
    }
    GramMatrix::from_matrix(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticContext {
    pub sigma: GramMatrix,
    pub f0: f64,
    pub tau: QuantileLevel,
    pub n: usize,
    pub u: Vec<f64>,
}

impl AsymptoticContext {
    pub fn new(sigma: GramMatrix, f0: f64, tau: QuantileLevel, n: usize, u: Vec<f64>) -> Result<Self> {
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::contract("f(0) must be positive and finite"));
        }
        if n == 0 {
            return Err(Error::contract("n must be positive"));
        }
        if u.len() != sigma.dim() {
            return Err(Error::contract("direction length does not match Σ"));
        }
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::contract(format!("direction must have unit norm, got {norm}")));
        }
        Ok(Self { sigma, f0, tau, n, u })
    }

    /// Standard deviation of `uᵀβ̂_A` under the normal approximation.
    pub fn std_error(&self) -> Result<f64> {
        let t = self.tau.value();
        let q = self.sigma.inverse_quadratic_form(&self.u)?;
        Ok((t * (1.0 - t) * q).sqrt() / ((self.n as f64).sqrt() * self.f0))
    }

    fn project(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.u.len() {
            return Err(Error::contract("coefficient length does not match the direction"));
        }
        Ok(self.u.iter().zip(v).map(|(a, b)| a * b).sum())
    }
}

/// The standardized statistic `Z`.
pub fn standardized_stat(ctx: &AsymptoticContext, beta_hat_a: &[f64], beta0_a: &[f64]) -> Result<f64> {
    let se = ctx.std_error()?;
    let diff = ctx.project(beta_hat_a)? - ctx.project(beta0_a)?;
    Ok(diff / se)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Two-sided interval for `uᵀβ⁰_A` at the given confidence level.
pub fn confidence_interval(ctx: &AsymptoticContext, beta_hat_a: &[f64], level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::contract(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let center = ctx.project(beta_hat_a)?;
    let z = standard_normal().inverse_cdf(0.5 * (1.0 + level));
    let h = z * ctx.std_error()?;
    Ok(Interval {
        lower: center - h,
        upper: center + h,
    })
}

pub(crate) fn standard_normal() -> Normal {
    Normal::standard()
}

/// Gaussian-kernel estimate of the residual density at zero.
///
/// The default bandwidth is `1.06 · min(sd, IQR/1.349) · n^{-1/5}` (falling back
/// to `sd` when the IQR is zero). Intended for real data; it has no
/// theoretical backing in the asymptotic statements above.
pub fn estimate_f0(residuals: &[f64], bandwidth: Option<f64>) -> Result<f64> {
    let n = residuals.len();
    if n < 20 {
        return Err(Error::DegenerateResiduals(format!(
            "need at least 20 residuals, got {n}"
        )));
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::DegenerateResiduals("non-finite residuals".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::contract(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(residuals)?,
    };
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let s: f64 = residuals
        .iter()
        .map(|r| (-0.5 * (r / h).powi(2)).exp())
        .sum();
    let f = s / (n as f64 * h * norm);
    if f > 0.0 {
        Ok(f)
    } else {
        Err(Error::DegenerateResiduals(
            "kernel estimate underflowed to zero".into(),
        ))
    }
}

fn silverman_bandwidth(r: &[f64]) -> Result<f64> {
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::DegenerateResiduals("all residuals are identical".into()));
    }
    let mut sorted = r.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    Ok(1.06 * spread * n.powf(-0.2))
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
