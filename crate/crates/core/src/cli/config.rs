//! Run configuration: flat `key = value` files with `#` comments, overridden
//! by command-line flags.
//!
//! Recognized keys (all optional):
//!
//! | key | meaning |
//! |-----|---------|
//! | `input`, `output` | dataset CSV; output directory |
//! | `tau` | quantile level (default 0.5) |
//! | `lambda`, `gamma` | tuning pair for `fit` |
//! | `lambda_grid`, `gamma_grid` | comma lists for `select` (λ sorted decreasing) |
//! | `seed`, `threads` | RNG seed; worker bound (0 = automatic) |
//! | `max_outer`, `max_sweeps`, `obj_tol`, `zero_tol`, `init`, `escape`, `escape_max_n` | solver settings (`init` = `zeros` or `l1_warm`; `escape` = `true` or `false`; escape moves run only when n ≤ `escape_max_n`) |
//! | `sn_policy`, `sn_value`, `sn_coef`, `sn_exponent` | BIC `S_n` rule (`auto`, `fixed`, `formula`) |
//! | `a_exponent`, `c_cap`, `loss_floor` | cardinality cap and loss floor |
//! | `n`, `d`, `reps`, `beta0` | simulation size and truth (`d` defaults to the length of `beta0`) |
//! | `error`, `error_param` | `normal`, `student_t`, `laplace` or `cauchy` and its scale / d.o.f. |
//! | `design`, `rho` | `gaussian_iid` or `gaussian_correlated` |
//! | `estimator`, `lambda_scale`, `ci_level` | `fixed` or `bic`; default-λ multiplier; interval level |
//! | `ladder` | comma list of sample sizes for the rate plot (`d = ⌊2 n^0.4⌋`) |

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{BicConfig, SnPolicy};
use crate::simulation::Design;
use crate::solver::{FitConfig, InitStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Fit,
    Select,
    Simulate,
    Check,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fit" => Ok(Command::Fit),
            "select" => Ok(Command::Select),
            "simulate" => Ok(Command::Simulate),
            "check" => Ok(Command::Check),
            other => Err(Error::Usage(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorLaw {
    Normal,
    StudentT,
    Laplace,
    Cauchy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub n: usize,
    pub d: Option<usize>,
    pub reps: usize,
    pub beta0: Vec<f64>,
    pub error: ErrorLaw,
    pub error_param: f64,
    pub design: Design,
    pub estimator: crate::simulation::Estimator,
    pub lambda_scale: f64,
    pub ci_level: f64,
    pub ladder: Vec<usize>,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            n: 200,
            d: None,
            reps: 20,
            beta0: vec![2.0, -2.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            error: ErrorLaw::Normal,
            error_param: 1.0,
            design: Design::GaussianIid,
            estimator: crate::simulation::Estimator::FixedTuning,
            lambda_scale: 1.0,
            ci_level: 0.95,
            ladder: Vec::new(),
        }
    }
}

/// Fully resolved configuration; echoed verbatim into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<String>,
    pub output: Option<String>,
    pub tau: f64,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
    pub seed: u64,
    pub threads: usize,
    pub fit: FitConfig,
    pub bic: BicConfig,
    pub sim: SimSettings,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            output: None,
            tau: 0.5,
            lambda: None,
            gamma: None,
            lambda_grid: None,
            gamma_grid: None,
            seed: 1,
            threads: 0,
            fit: FitConfig::default(),
            bic: BicConfig::default(),
            sim: SimSettings::default(),
        }
    }

    /// Applies `key = value` pairs. Unknown keys are usage errors.
    pub fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        let mut sn_value = None;
        let mut sn_coef = None;
        let mut sn_exponent = None;
        let mut sn_policy = None;
        for (key, value) in entries {
            let v = value.as_str();
            match key.as_str() {
                "command" => self.command = v.parse()?,
                "input" => self.input = Some(v.to_string()),
                "output" => self.output = Some(v.to_string()),
                "tau" => self.tau = num(key, v)?,
                "lambda" => self.lambda = Some(num(key, v)?),
                "gamma" => self.gamma = Some(num(key, v)?),
                "lambda_grid" => self.lambda_grid = Some(list(key, v)?),
                "gamma_grid" => self.gamma_grid = Some(list(key, v)?),
                "seed" => self.seed = num(key, v)?,
                "threads" => self.threads = num(key, v)?,
                "max_outer" => self.fit.max_outer = num(key, v)?,
                "max_sweeps" => self.fit.max_sweeps = num(key, v)?,
                "obj_tol" => self.fit.obj_tol = num(key, v)?,
                "zero_tol" => self.fit.zero_tol = num(key, v)?,
                "init" => {
                    self.fit.init = match v {
                        "zeros" => InitStrategy::Zeros,
                        "l1_warm" => InitStrategy::L1Warm,
                        _ => return Err(bad(key, v)),
                    }
                }
                "escape" => self.fit.escape = num(key, v)?,
                "escape_max_n" => self.fit.escape_max_n = num(key, v)?,
                "sn_policy" => sn_policy = Some(v.to_string()),
                "sn_value" => sn_value = Some(num::<f64>(key, v)?),
                "sn_coef" => sn_coef = Some(num::<f64>(key, v)?),
                "sn_exponent" => sn_exponent = Some(num::<f64>(key, v)?),
                "a_exponent" => self.bic.a_exponent = num(key, v)?,
                "c_cap" => self.bic.c_cap = num(key, v)?,
                "loss_floor" => self.bic.loss_floor = num(key, v)?,
                "n" => self.sim.n = num(key, v)?,
                "d" => self.sim.d = Some(num(key, v)?),
                "reps" => self.sim.reps = num(key, v)?,
                "beta0" => self.sim.beta0 = list(key, v)?,
                "error" => {
                    self.sim.error = match v {
                        "normal" => ErrorLaw::Normal,
                        "student_t" => ErrorLaw::StudentT,
                        "laplace" => ErrorLaw::Laplace,
                        "cauchy" => ErrorLaw::Cauchy,
                        _ => return Err(bad(key, v)),
                    }
                }
                "error_param" => self.sim.error_param = num(key, v)?,
                "design" => {
                    self.sim.design = match v {
                        "gaussian_iid" => Design::GaussianIid,
                        "gaussian_correlated" => match self.sim.design {
                            Design::GaussianCorrelated { rho } => Design::GaussianCorrelated { rho },
                            Design::GaussianIid => Design::GaussianCorrelated { rho: 0.5 },
                        },
                        _ => return Err(bad(key, v)),
                    }
                }
                "rho" => {
                    let rho = num(key, v)?;
                    self.sim.design = Design::GaussianCorrelated { rho };
                }
                "estimator" => {
                    self.sim.estimator = match v {
                        "fixed" => crate::simulation::Estimator::FixedTuning,
                        "bic" => crate::simulation::Estimator::Bic,
                        _ => return Err(bad(key, v)),
                    }
                }
                "lambda_scale" => self.sim.lambda_scale = num(key, v)?,
                "ci_level" => self.sim.ci_level = num(key, v)?,
                "ladder" => self.sim.ladder = list(key, v)?,
                other => return Err(Error::Usage(format!("unknown configuration key '{other}'"))),
            }
        }
        if let Some(p) = sn_policy {
            self.bic.sn_policy = match p.as_str() {
                "auto" => SnPolicy::Auto,
                "fixed" => SnPolicy::Fixed {
                    value: sn_value.ok_or_else(|| Error::Usage("sn_policy = fixed needs sn_value".into()))?,
                },
                "formula" => SnPolicy::Formula {
                    coef: sn_coef.unwrap_or(1.0),
                    exponent: sn_exponent
                        .ok_or_else(|| Error::Usage("sn_policy = formula needs sn_exponent".into()))?,
                },
                _ => return Err(bad("sn_policy", &p)),
            };
        } else if let Some(value) = sn_value {
            self.bic.sn_policy = SnPolicy::Fixed { value };
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Usage(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        match self.command {
            Command::Fit | Command::Select | Command::Check if self.input.is_none() => {
                Err(Error::Usage("this command needs --input".into()))
            }
            _ => Ok(()),
        }
    }
}

fn bad(key: &str, v: &str) -> Error {
    Error::Usage(format!("invalid value '{v}' for '{key}'"))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| bad(key, v))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// Parses `key = value` lines; blank lines and `#` comments are ignored.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config line {}: expected 'key = value'", k + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Usage(format!("config line {}: empty key", k + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let text = "# demo\ntau = 0.25\nlambda_grid = 1, 0.5,0.1 # trailing\n\nseed=9\nsn_policy = fixed\nsn_value = 3.5\n";
        let kv = parse_kv(text).unwrap();
        let mut cfg = RunConfig::new(Command::Select);
        cfg.apply(&kv).unwrap();
        assert_eq!(cfg.tau, 0.25);
        assert_eq!(cfg.lambda_grid, Some(vec![1.0, 0.5, 0.1]));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.bic.sn_policy, SnPolicy::Fixed { value: 3.5 });
    }

    #[test]
    fn empty_grid_parses_to_empty_list() {
        let kv = parse_kv("lambda_grid =\n").unwrap();
        let mut cfg = RunConfig::new(Command::Select);
        cfg.apply(&kv).unwrap();
        assert_eq!(cfg.lambda_grid, Some(vec![]));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut cfg = RunConfig::new(Command::Fit);
        assert!(matches!(cfg.apply(&parse_kv("bogus = 1").unwrap()), Err(Error::Usage(_))));
        assert!(matches!(cfg.apply(&parse_kv("tau = x").unwrap()), Err(Error::Usage(_))));
        assert!(parse_kv("no equals sign").is_err());
        assert!(cfg.validate().is_err());
    }
}
