//! Data containers, the quantile check loss and the penalized objective.
//!
//! The objective minimized throughout the crate is
//!
//! ```text
//! Q(β) = (1/(2n)) Σᵢ ρ_τ(yᵢ − xᵢᵀβ) + Σⱼ p(βⱼ)
//! ```
//!
//! where `ρ_τ(u) = u (τ − 1{u < 0})` and `p` is the seamless-L0 penalty from
//! [`crate::penalty`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::{penalty_total, SeloTuning};

/// Response vector and dense row-major design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from a response vector and a row-major `n × d` design.
    pub fn new(y: Vec<f64>, x: Vec<f64>, d: usize) -> Result<Self> {
        let n = y.len();
        if n == 0 || d == 0 {
            return Err(Error::contract(format!(
                "dataset needs n >= 1 and d >= 1 (got n = {n}, d = {d})"
            )));
        }
        if x.len() != n * d {
            return Err(Error::contract(format!(
                "design has {} entries, expected n * d = {}",
                x.len(),
                n * d
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(Some(i + 1), None, "non-finite response value"));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(
                Some(k / d + 1),
                Some(k % d + 1),
                "non-finite design entry",
            ));
        }
        Ok(Self { y, x, n, d })
    }

    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != y.len() {
            return Err(Error::contract(format!(
                "{} design rows for {} responses",
                rows.len(),
                y.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::contract(format!(
                "design row {i} has {} columns, expected {d}",
                rows[i].len()
            )));
        }
        Self::new(y, rows.concat(), d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Row-major design entries.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.d + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// `Xβ`.
    pub fn predict(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_beta(beta)?;
        Ok((0..self.n)
            .map(|i| dot(self.row(i), beta))
            .collect())
    }

    /// `y − Xβ`.
    pub fn residuals(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let fitted = self.predict(beta)?;
        Ok(self.y.iter().zip(fitted).map(|(y, f)| y - f).collect())
    }

    /// The dataset restricted to the given columns, in the order listed.
    pub fn select_columns(&self, cols: &IndexSet) -> Result<Dataset> {
        if cols.is_empty() {
            return Err(Error::contract("cannot select an empty column set"));
        }
        cols.check_within(self.d)?;
        let k = cols.len();
        let mut x = Vec::with_capacity(self.n * k);
        for i in 0..self.n {
            let row = self.row(i);
            x.extend(cols.iter().map(|j| row[j]));
        }
        Dataset::new(self.y.clone(), x, k)
    }

    pub(crate) fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.d {
            return Err(Error::contract(format!(
                "coefficient vector has length {}, dataset has d = {}",
                beta.len(),
                self.d
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::contract("coefficient vector has non-finite entries"));
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quantile index τ ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_finite() && tau > 0.0 && tau < 1.0 {
            Ok(Self(tau))
        } else {
            Err(Error::contract(format!("quantile level must lie in (0, 1), got {tau}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QuantileLevel {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        Self::new(tau)
    }
}

impl From<QuantileLevel> for f64 {
    fn from(t: QuantileLevel) -> f64 {
        t.0
    }
}

/// Strictly increasing set of column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Sorts and deduplicates the given indices.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// `{0, …, d−1}`.
    pub fn full(d: usize) -> Self {
        Self((0..d).collect())
    }

    /// Indices whose coefficient magnitude exceeds `zero_tol`.
    pub fn support(beta: &[f64], zero_tol: f64) -> Self {
        Self(
            beta.iter()
                .enumerate()
                .filter(|(_, b)| b.abs() > zero_tol)
                .map(|(j, _)| j)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|j| other.contains(j))
    }

    pub fn check_within(&self, d: usize) -> Result<()> {
        match self.0.last() {
            Some(&j) if j >= d => Err(Error::contract(format!(
                "index {j} out of range for d = {d}"
            ))),
            _ => Ok(()),
        }
    }

    /// Gathers `values[j]` for every member `j`.
    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.iter().map(|j| values[j]).collect()
    }
}

/// ρ_τ(u) = u (τ − 1{u < 0}).
pub fn check_loss(u: f64, tau: QuantileLevel) -> f64 {
    let t = tau.value();
    if u < 0.0 {
        u * (t - 1.0)
    } else {
        u * t
    }
}

/// `(1/(2n)) Σ ρ_τ(rᵢ)` for a residual vector.
pub fn scaled_loss(residuals: &[f64], tau: QuantileLevel) -> f64 {
    let n = residuals.len() as f64;
    residuals.iter().map(|&r| check_loss(r, tau)).sum::<f64>() / (2.0 * n)
}

/// `(1/n) Σ ρ_τ(rᵢ)`, the mean check loss entering the BIC.
pub fn mean_loss(residuals: &[f64], tau: QuantileLevel) -> f64 {
    2.0 * scaled_loss(residuals, tau)
}

/// Penalized objective `Q(β)`.
pub fn objective(
    ds: &Dataset,
    beta: &[f64],
    tau: QuantileLevel,
    tuning: SeloTuning,
) -> Result<f64> {
    let r = ds.residuals(beta)?;
    Ok(scaled_loss(&r, tau) + penalty_total(beta, tuning))
}

/// Closed-form split of `ρ_τ(x − y) − ρ_τ(x)` into Knight's linear term
/// `y (1{x ≤ 0} − τ)` and integral term `∫₀^y (1{x ≤ t} − 1{x ≤ 0}) dt`.
pub fn knight_decompose(x: f64, y: f64, tau: QuantileLevel) -> (f64, f64) {
    let indicator = if x <= 0.0 { 1.0 } else { 0.0 };
    let linear = y * (indicator - tau.value());
    let integral = if x > 0.0 {
        if y > x {
            y - x
        } else {
            0.0
        }
    } else if y < x {
        x - y
    } else {
        0.0
    };
    (linear, integral)
}

/// `rᵢ = yᵢ − Σ_{k≠j} Xᵢₖ βₖ`.
pub fn partial_residuals(ds: &Dataset, beta: &[f64], j: usize) -> Result<Vec<f64>> {
    ds.check_beta(beta)?;
    if j >= ds.d() {
        return Err(Error::contract(format!(
            "column index {j} out of range for d = {}",
            ds.d()
        )));
    }
    Ok((0..ds.n())
        .map(|i| {
            let row = ds.row(i);
            let fit: f64 = row
                .iter()
                .zip(beta)
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, (x, b))| x * b)
                .sum();
            ds.y()[i] - fit
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(t: f64) -> QuantileLevel {
        QuantileLevel::new(t).unwrap()
    }

    #[test]
    fn check_loss_examples() {
        assert_eq!(check_loss(2.0, tau(0.5)), 1.0);
        assert_eq!(check_loss(0.0, tau(0.3)), 0.0);
        assert_eq!(check_loss(-2.0, tau(0.25)), 1.5);
    }

    #[test]
    fn objective_hand_value() {
        let ds = Dataset::from_rows(vec![1.0, -1.0], &[vec![1.0], vec![1.0]]).unwrap();
        let t = SeloTuning::new(1.0, 0.1).unwrap();
        let q = objective(&ds, &[0.0], tau(0.5), t).unwrap();
        assert!((q - 0.25).abs() < 1e-15);
    }

    #[test]
    fn objective_zero_at_exact_fit_without_penalty() {
        let rows = vec![vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0]];
        let beta = [0.7, -1.3];
        let y = rows.iter().map(|r| dot(r, &beta)).collect();
        let ds = Dataset::from_rows(y, &rows).unwrap();
        let t = SeloTuning::new(0.0, 0.1).unwrap();
        assert!(objective(&ds, &beta, tau(0.37), t).unwrap().abs() < 1e-15);
    }

    #[test]
    fn objective_rejects_dimension_mismatch() {
        let ds = Dataset::from_rows(vec![1.0], &[vec![1.0, 2.0]]).unwrap();
        let t = SeloTuning::new(1.0, 0.1).unwrap();
        assert!(matches!(
            objective(&ds, &[0.0], tau(0.5), t),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn knight_examples() {
        assert_eq!(knight_decompose(1.0, 2.0, tau(0.5)), (-1.0, 1.0));
        assert_eq!(knight_decompose(-1.0, -2.0, tau(0.5)), (-1.0, 1.0));
        let (a, b) = knight_decompose(3.0, 0.0, tau(0.7));
        assert_eq!(a, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn partial_residual_trivial_cases() {
        let ds = Dataset::from_rows(vec![1.0, 2.0], &[vec![1.0, 4.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(partial_residuals(&ds, &[0.0, 0.0], 1).unwrap(), vec![1.0, 2.0]);
        let ds1 = Dataset::from_rows(vec![1.0, 2.0], &[vec![3.0], vec![4.0]]).unwrap();
        assert_eq!(partial_residuals(&ds1, &[5.0], 0).unwrap(), vec![1.0, 2.0]);
        assert!(partial_residuals(&ds, &[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn dataset_rejects_non_finite() {
        let err = Dataset::from_rows(vec![1.0, 2.0], &[vec![1.0], vec![f64::NAN]]).unwrap_err();
        assert_eq!(
            err,
            Error::Data {
                row: Some(2),
                column: Some(1),
                message: "non-finite design entry".into()
            }
        );
        assert!(Dataset::new(vec![], vec![], 1).is_err());
    }

    #[test]
    fn quantile_level_bounds() {
        assert!(QuantileLevel::new(0.0).is_err());
        assert!(QuantileLevel::new(1.0).is_err());
        assert!(QuantileLevel::new(f64::NAN).is_err());
        assert!(QuantileLevel::new(0.01).is_ok());
    }

    #[test]
    fn index_set_normalizes() {
        let s = IndexSet::from_indices([3, 1, 3, 0]);
        assert_eq!(s.as_slice(), &[0, 1, 3]);
        assert!(s.check_within(4).is_ok());
        assert!(s.check_within(3).is_err());
        assert_eq!(IndexSet::support(&[0.0, 1e-9, -0.5], 1e-8).as_slice(), &[2]);
    }
}
