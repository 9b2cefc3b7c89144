//! Error laws shifted so that their τ-quantile sits at zero.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::model::QuantileLevel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum ErrorKind {
    Normal { sigma: f64 },
    StudentT { nu: f64 },
    Laplace { b: f64 },
    Cauchy { s: f64 },
}

/// A base law minus its τ-quantile, so that `F(0) = τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorDistribution {
    pub kind: ErrorKind,
    pub tau: QuantileLevel,
    /// τ-quantile of the base law.
    pub shift: f64,
    /// Density of the base law at `shift`.
    pub f0: f64,
}

/// Builds the shifted law and its density at the origin.
pub fn make_error_dist(kind: ErrorKind, tau: QuantileLevel) -> Result<ErrorDistribution> {
    let t = tau.value();
    let (shift, f0) = match kind {
        ErrorKind::Normal { sigma } => {
            positive("sigma", sigma)?;
            let std = statrs::distribution::Normal::standard();
            let z = std.inverse_cdf(t);
            (sigma * z, std.pdf(z) / sigma)
        }
        ErrorKind::StudentT { nu } => {
            positive("nu", nu)?;
            let law = StudentsT::new(0.0, 1.0, nu)
                .map_err(|e| Error::contract(format!("student t: {e}")))?;
            // Symmetric form: F(x) − 1/2 = sign(x) · I_{x²/(ν+x²)}(1/2, ν/2) / 2,
            // which keeps full precision near the centre.
            let target = (2.0 * t - 1.0).abs();
            let q = if target == 0.0 {
                0.0
            } else {
                let h = |x: f64| beta_reg(0.5, 0.5 * nu, x * x / (nu + x * x));
                (2.0 * t - 1.0).signum() * invert_cdf(|x| h(x.max(0.0)), target, 1e-12)
            };
            (q, law.pdf(q))
        }
        ErrorKind::Laplace { b } => {
            positive("b", b)?;
            let q = if t < 0.5 {
                b * (2.0 * t).ln()
            } else {
                -b * (2.0 - 2.0 * t).ln()
            };
            (q, (-q.abs() / b).exp() / (2.0 * b))
        }
        ErrorKind::Cauchy { s } => {
            positive("s", s)?;
            let q = s * (PI * (t - 0.5)).tan();
            (q, 1.0 / (PI * s * (1.0 + (q / s).powi(2))))
        }
    };
    Ok(ErrorDistribution {
        kind,
        tau,
        shift,
        f0,
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::contract(format!("{name} must be positive, got {v}")))
    }
}

/// Bisection for `cdf(x) = p` on an expanding bracket.
fn invert_cdf(cdf: impl Fn(f64) -> f64, p: f64, tol: f64) -> f64 {
    let mut lo = -1.0;
    let mut hi = 1.0;
    while cdf(lo) > p {
        lo *= 2.0;
    }
    while cdf(hi) < p {
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl ErrorDistribution {
    /// One draw of `ε = base − shift`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let base = match self.kind {
            ErrorKind::Normal { sigma } => Normal::new(0.0, sigma)
                .expect("validated sigma")
                .sample(rng),
            ErrorKind::StudentT { nu } => StudentT::new(nu).expect("validated nu").sample(rng),
            ErrorKind::Laplace { b } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            ErrorKind::Cauchy { s } => Cauchy::new(0.0, s).expect("validated s").sample(rng),
        };
        base - self.shift
    }
}
