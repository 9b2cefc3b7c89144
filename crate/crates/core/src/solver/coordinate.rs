//! Exact one-dimensional minimizers used by the coordinate sweeps.
//!
//! Along coordinate `j`, with partial residuals `r` and column `x`, the loss
//! part of the objective is `φ(t) = (1/(2n)) Σ ρ_τ(rᵢ − xᵢ t)`. It is convex and
//! piecewise linear with kinks at `bᵢ = rᵢ / xᵢ`; each kink raises the slope by
//! `|xᵢ| / (2n)`.

use crate::model::QuantileLevel;
use crate::penalty::{penalty_value, SeloTuning};

/// Relative tolerance for treating an accumulated slope as zero.
const SLOPE_EPS: f64 = 1e-12;

/// Minimizes `φ(t) = (1/(2n)) Σᵢ ρ_τ(rᵢ − xᵢ t) + w |t|` exactly.
///
/// Among multiple minimizers the one of smallest magnitude is returned. When
/// every `xᵢ` is zero and `w = 0` the function is constant and 0 is returned.
///
/// # Panics
///
/// If `r` and `xj` differ in length or `n == 0`.
pub fn coordinate_min(r: &[f64], xj: &[f64], tau: QuantileLevel, n: usize, w: f64) -> f64 {
    assert_eq!(r.len(), xj.len(), "residual and column lengths differ");
    assert!(n > 0, "n must be positive");
    let mut buf = Vec::with_capacity(r.len() + 1);
    weighted_l1_min(r, xj, tau.value(), 0.5 / n as f64, w.max(0.0), &mut buf)
}

/// Subgradient test: is `t = 0` a minimizer of the weighted-L1 coordinate problem?
pub(crate) fn zero_is_optimal(r: &[f64], x: &[f64], tau: f64, inv2n: f64, w: f64) -> bool {
    // Left/right derivatives of the loss part at t = 0.
    let mut right = 0.0;
    let mut left = 0.0;
    let mut scale = 0.0;
    for (&ri, &xi) in r.iter().zip(x) {
        if xi == 0.0 {
            continue;
        }
        scale += xi.abs();
        if ri > 0.0 {
            let s = -xi * tau;
            right += s;
            left += s;
        } else if ri < 0.0 {
            let s = xi * (1.0 - tau);
            right += s;
            left += s;
        } else {
            // residual sits on the kink
            right += if xi > 0.0 { xi * (1.0 - tau) } else { -xi * tau };
            left += if xi > 0.0 { -xi * tau } else { xi * (1.0 - tau) };
        }
    }
    let eps = SLOPE_EPS * (scale * inv2n + w);
    left * inv2n - w <= eps && right * inv2n + w >= -eps
}

/// Exact weighted-L1 coordinate minimizer by breakpoint sort and slope scan.
pub(crate) fn weighted_l1_min(
    r: &[f64],
    x: &[f64],
    tau: f64,
    inv2n: f64,
    w: f64,
    buf: &mut Vec<(f64, f64)>,
) -> f64 {
    if zero_is_optimal(r, x, tau, inv2n, w) {
        return 0.0;
    }
    buf.clear();
    let mut slope = -w;
    let mut total = 2.0 * w;
    for (&ri, &xi) in r.iter().zip(x) {
        if xi == 0.0 {
            continue;
        }
        let a = xi.abs() * inv2n;
        slope -= (if xi > 0.0 { xi * tau } else { -xi * (1.0 - tau) }) * inv2n;
        total += a;
        buf.push((ri / xi, a));
    }
    if w > 0.0 {
        buf.push((0.0, 2.0 * w));
    }
    if buf.is_empty() {
        return 0.0;
    }
    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let eps = SLOPE_EPS * total;
    for k in 0..buf.len() {
        slope += buf[k].1;
        let lo = buf[k].0;
        if slope > eps {
            return lo;
        }
        if slope >= -eps {
            // flat piece [lo, hi]: every point minimizes, take the smallest |t|
            let hi = buf.get(k + 1).map_or(lo, |e| e.0);
            return if lo <= 0.0 && hi >= 0.0 {
                0.0
            } else if lo > 0.0 {
                lo
            } else {
                hi
            };
        }
    }
    buf[buf.len() - 1].0
}

/// Global minimizer of the nonconvex coordinate function
/// `ψ(t) = (1/(2n)) Σ ρ_τ(rᵢ − xᵢ t) + p(t)`.
///
/// Between consecutive kinks (0 counted as a kink) ψ is a linear function plus
/// a concave one, so its minimum over each piece sits at an endpoint and the
/// global minimum is attained at a kink. Loss values are propagated along the
/// sorted kinks; ties go to the smaller `|t|`. Returns `(t, ψ(t))` with ψ
/// computed by propagation, which callers should re-evaluate before trusting
/// small differences.
pub(crate) fn selo_global_min(
    r: &[f64],
    x: &[f64],
    tau: f64,
    inv2n: f64,
    tuning: SeloTuning,
    buf: &mut Vec<(f64, f64)>,
) -> (f64, f64) {
    line_global_min(r, x, tau, inv2n, &[], |t| penalty_value(t, tuning), buf)
}

/// Global minimizer of `(1/(2n)) Σ ρ_τ(rᵢ − xᵢ t) + pen(t)` when `pen` is
/// nonnegative and concave between consecutive points of `extra` (and of 0).
/// The loss is linear between its kinks, so the minimum sits on a kink, on 0
/// or on a point of `extra`. Ties go to the smallest `|t|`. Returns
/// `(t, value)`.
///
/// Only a window around 0 is searched: with `g` the one-sided loss slope at 0
/// in the direction of `t`, convexity and `pen ≥ 0` give
/// `value(t) ≥ value(0) + t·g − pen(0)`, so nothing with `t·g > pen(0)` can win.
pub(crate) fn line_global_min(
    r: &[f64],
    x: &[f64],
    tau: f64,
    inv2n: f64,
    extra: &[f64],
    pen: impl Fn(f64) -> f64,
    buf: &mut Vec<(f64, f64)>,
) -> (f64, f64) {
    let at_zero = loss_along(r, x, tau, inv2n, 0.0) + pen(0.0);
    // one-sided slopes at 0
    let (mut right, mut left) = (0.0, 0.0);
    for (&ri, &xi) in r.iter().zip(x) {
        let up = -xi * tau;
        let down = xi * (1.0 - tau);
        if ri > 0.0 {
            right += up;
            left += up;
        } else if ri < 0.0 {
            right += down;
            left += down;
        } else if xi > 0.0 {
            right += down;
            left += up;
        } else {
            right += up;
            left += down;
        }
    }
    let p0 = pen(0.0);
    let hi = if right > 0.0 { p0 / (right * inv2n) } else { f64::INFINITY };
    let lo = if left < 0.0 { p0 / (left * inv2n) } else { f64::NEG_INFINITY };
    if hi <= 0.0 && lo >= 0.0 {
        return (0.0, at_zero);
    }

    buf.clear();
    buf.push((0.0, 0.0));
    buf.extend(
        extra
            .iter()
            .filter(|e| e.is_finite() && (lo..=hi).contains(*e))
            .map(|&e| (e, 0.0)),
    );
    let mut passed = 0.0;
    for (&ri, &xi) in r.iter().zip(x) {
        if xi == 0.0 {
            continue;
        }
        let t = ri / xi;
        let jump = xi.abs() * inv2n;
        if t < lo {
            passed += jump;
        } else if t <= hi {
            buf.push((t, jump));
        }
    }
    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let first = buf[0].0;
    // slope just left of `first`: all kinks below it have been passed
    let mut slope = passed
        - x.iter()
            .map(|&xi| if xi > 0.0 { xi * tau } else { -xi * (1.0 - tau) })
            .sum::<f64>()
            * inv2n;

    let mut loss = loss_along(r, x, tau, inv2n, first);
    let mut best_t: f64 = 0.0;
    let mut best = at_zero;
    let mut prev = first;
    for &(b, jump) in buf.iter() {
        loss += slope * (b - prev);
        prev = b;
        // exact value at the origin avoids drift on the sparsest candidate
        let value = if b == 0.0 { at_zero } else { loss + pen(b) };
        if value < best || (value == best && b.abs() < best_t.abs()) {
            best = value;
            best_t = b;
        }
        slope += jump;
    }
    (best_t, best)
}

pub(crate) fn loss_along(r: &[f64], x: &[f64], tau: f64, inv2n: f64, t: f64) -> f64 {
    let mut s = 0.0;
    for (&ri, &xi) in r.iter().zip(x) {
        let u = ri - xi * t;
        s += if u < 0.0 { u * (tau - 1.0) } else { u * tau };
    }
    s * inv2n
}
