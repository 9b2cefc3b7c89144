use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FitConfig, FitResult, Problem};
use crate::error::{Error, Result};
use crate::model::{Dataset, QuantileLevel};
use crate::penalty::SeloTuning;

/// Which start produced a path cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Cold,
    Warm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCell {
    pub lambda_index: usize,
    pub gamma_index: usize,
    pub start: StartKind,
    pub fit: FitResult,
}

/// Fits over a (λ, γ) grid, stored γ-major with λ in the given (decreasing) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub cells: Vec<PathCell>,
}

impl PathResult {
    pub fn cell(&self, lambda_index: usize, gamma_index: usize) -> &PathCell {
        &self.cells[gamma_index * self.lambdas.len() + lambda_index]
    }
}

/// Fits every (λ, γ) pair.
///
/// Within a γ column the λ grid is traversed in decreasing order. Each cell is
/// solved from the previous cell's estimate (warm) and from the configured
/// cold start; the lower objective is kept, warm winning ties. The first cell
/// of each column is cold only. Distinct γ columns run in parallel; the output
/// does not depend on scheduling.
pub fn fit_path(
    ds: &Dataset,
    tau: QuantileLevel,
    lambdas: &[f64],
    gammas: &[f64],
    cfg: &FitConfig,
) -> Result<PathResult> {
    cfg.validate()?;
    if lambdas.is_empty() || gammas.is_empty() {
        return Err(Error::contract("tuning grids must be nonempty"));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::contract("lambda grid must be strictly decreasing"));
    }
    for &g in gammas {
        SeloTuning::new(1.0, g)?;
    }
    for &l in lambdas {
        SeloTuning::new(l, 1.0)?;
    }

    let columns: Vec<Result<Vec<PathCell>>> = gammas
        .par_iter()
        .enumerate()
        .map(|(gi, &gamma)| gamma_column(ds, tau, lambdas, gi, gamma, cfg))
        .collect();
    let mut cells = Vec::with_capacity(lambdas.len() * gammas.len());
    for col in columns {
        cells.extend(col?);
    }
    Ok(PathResult {
        lambdas: lambdas.to_vec(),
        gammas: gammas.to_vec(),
        cells,
    })
}

fn gamma_column(
    ds: &Dataset,
    tau: QuantileLevel,
    lambdas: &[f64],
    gi: usize,
    gamma: f64,
    cfg: &FitConfig,
) -> Result<Vec<PathCell>> {
    let problem = Problem::new(ds, tau);
    let mut out: Vec<PathCell> = Vec::with_capacity(lambdas.len());
    for (li, &lambda) in lambdas.iter().enumerate() {
        let tuning = SeloTuning { lambda, gamma };
        let attach = |e: Error| Error::GridCell {
            lambda,
            gamma,
            source: Box::new(e),
        };
        let cold = problem
            .solve(problem.start(tuning, cfg), tuning, cfg)
            .map_err(attach)?;
        let cell = match out.last() {
            None => PathCell {
                lambda_index: li,
                gamma_index: gi,
                start: StartKind::Cold,
                fit: cold,
            },
            Some(prev) => {
                let warm = problem
                    .solve(prev.fit.beta_hat.clone(), tuning, cfg)
                    .map_err(attach)?;
                let (start, fit) = if warm.objective <= cold.objective {
                    (StartKind::Warm, warm)
                } else {
                    (StartKind::Cold, cold)
                };
                PathCell {
                    lambda_index: li,
                    gamma_index: gi,
                    start,
                    fit,
                }
            }
        };
        out.push(cell);
    }
    Ok(out)
}
