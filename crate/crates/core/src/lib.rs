//! Sparse quantile regression with the seamless-L0 (SELO) penalty.
//!
//! The crate fits
//!
//! ```text
//! β̂ = argmin (1/(2n)) Σᵢ ρ_τ(yᵢ − xᵢᵀβ) + Σⱼ (λ/log 2)·log(1 + |βⱼ|/(|βⱼ| + γ))
//! ```
//!
//! and provides the surrounding machinery:
//!
//! * [`solver`]: local linear approximation over exact coordinate descent, and
//!   warm-started tuning paths.
//! * [`selection`]: a BIC for choosing (λ, γ) and the model.
//! * [`inference`]: normal-approximation statistics and intervals for the
//!   selected coefficients.
//! * [`simulation`]: data generation, design diagnostics and Monte Carlo
//!   checks of support recovery, convergence rate and normality.
//! * [`cli`]: CSV and config-file input, JSON/CSV reports, and the
//!   `selo-qr` command driver.
//!
//! ```
//! use selo_qr::{fit, Dataset, FitConfig, QuantileLevel, SeloTuning};
//!
//! let ds = Dataset::from_rows(
//!     vec![2.1, 3.9, 6.2, 8.0, 9.8],
//!     &[vec![1.0, 0.3], vec![2.0, -0.1], vec![3.0, 0.2], vec![4.0, 0.0], vec![5.0, -0.3]],
//! )
//! .unwrap();
//! let tau = QuantileLevel::new(0.5).unwrap();
//! let tuning = SeloTuning::new(0.05, 0.01).unwrap();
//! let res = fit(&ds, tau, tuning, &FitConfig::default(), None).unwrap();
//! assert_eq!(res.active_set.as_slice(), &[0]);
//! ```

pub mod cli;
pub mod error;
pub mod inference;
pub mod model;
pub mod penalty;
pub mod selection;
pub mod simulation;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    check_loss, knight_decompose, objective, partial_residuals, Dataset, IndexSet, QuantileLevel,
};
pub use penalty::{penalty_derivative, penalty_total, penalty_value, SeloTuning};
pub use selection::{
    bic_ordering_check, bic_score, fit_restricted, select, sn_value, BicConfig, BicScore,
    SelectionResult, SnPolicy,
};
pub use solver::{coordinate_min, fit, fit_path, lla_weights, FitConfig, FitResult, InitStrategy};
