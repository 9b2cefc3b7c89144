//! The seamless-L0 (SELO) penalty
//!
//! ```text
//! p(β) = (λ / log 2) · log(1 + |β| / (|β| + γ))
//! ```
//!
//! It rises from 0 at β = 0 to the plateau λ, and approaches `λ·1{β ≠ 0}` as
//! γ → 0. The shape parameter γ is typically tiny (of order √d · n^{-3/2}), so
//! all evaluations go through `ln_1p`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tuning pair (λ, γ).
///
/// γ must be strictly positive. λ = 0 is accepted and means "no penalty",
/// which is how the unpenalized quantile-regression limit is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeloTuning {
    pub lambda: f64,
    pub gamma: f64,
}

impl SeloTuning {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::contract(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::contract(format!(
                "gamma must be finite and positive, got {gamma}"
            )));
        }
        Ok(Self { lambda, gamma })
    }

    /// λ / log 2, the common prefactor.
    pub fn scale(&self) -> f64 {
        self.lambda / LN_2
    }

    /// Derivative of the penalty at the origin (right limit): (λ / log 2) / γ.
    pub fn max_weight(&self) -> f64 {
        self.scale() / self.gamma
    }
}

/// Penalty value `p(b)`; symmetric in `b`, range `[0, λ)`.
pub fn penalty_value(b: f64, t: SeloTuning) -> f64 {
    let a = b.abs();
    t.scale() * (a / (a + t.gamma)).ln_1p()
}

/// `Σⱼ p(βⱼ)`.
pub fn penalty_total(beta: &[f64], t: SeloTuning) -> f64 {
    beta.iter().map(|&b| penalty_value(b, t)).sum()
}

/// Derivative of the penalty with respect to `|b|`:
/// `(λ / log 2) · γ / ((|b| + γ)(2|b| + γ))`.
///
/// At `b = 0` this is the right limit `(λ / log 2) / γ`, which is the weight
/// the local linear approximation needs to keep or release an exact zero.
pub fn penalty_derivative(b: f64, t: SeloTuning) -> f64 {
    let a = b.abs();
    t.scale() * t.gamma / ((a + t.gamma) * (2.0 * a + t.gamma))
}
