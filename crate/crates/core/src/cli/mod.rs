//! Command-line driver: configuration, CSV datasets, JSON reports and
//! plot-ready CSV files.
//!
//! Every report has the top-level shape
//! `{command, config, result, diagnostics, version}`. Result files contain no
//! timestamps, paths of the output directory, or thread counts, so repeated
//! runs produce identical bytes.

mod config;
mod csv_io;

pub use config::{parse_kv, Command, ErrorLaw, RunConfig, SimSettings};
pub use csv_io::{fmt_num, parse_csv, read_csv, write_csv, write_csv_to};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{Dataset, QuantileLevel};
use crate::penalty::SeloTuning;
use crate::selection::{self, BicConfig, SelectionResult};
use crate::simulation::{
    self, assumption_report, log_log_slope, make_error_dist, ErrorKind, OracleMetrics, RatePoint,
    SimScenario,
};
use crate::solver::{fit, FitResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line flags. Values given here override the `--config` file.
#[derive(Debug, Parser)]
#[command(name = "selo-qr", version, about = "SELO-penalized quantile regression")]
pub struct Args {
    /// fit, select, simulate or check
    pub command: String,
    #[arg(long)]
    pub input: Option<String>,
    /// Output directory; reports go to stdout when absent
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Comma-separated λ values for `select`
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    /// Comma-separated γ values for `select`
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_grid: Option<String>,
    /// Flat `key = value` configuration file
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Upper bound on worker threads (0 = automatic)
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Args {
    /// Merges the configuration file (if any) with the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let command: Command = self.command.parse()?;
        let mut cfg = RunConfig::new(command);
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read config {path}: {e}")))?;
            let kv = parse_kv(&text)?;
            cfg.apply(&kv)?;
            cfg.command = command;
        }
        let mut over = std::collections::BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                over.insert(k.to_string(), v);
            }
        };
        put("input", self.input.clone());
        put("output", self.output.clone());
        put("tau", self.tau.map(|v| v.to_string()));
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("lambda_grid", self.lambda_grid.clone());
        put("gamma_grid", self.gamma_grid.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        cfg.apply(&over)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match args.resolve() {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Executes one command and returns the process exit code:
/// 0 success, 1 usage, 2 data, 3 numerical failure.
pub fn run(cfg: &RunConfig) -> i32 {
    let outcome = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start thread pool: {e}")))
        .and_then(|pool| pool.install(|| execute(cfg)))
        .and_then(|out| emit(cfg, &out));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// A finished command: the JSON report plus named CSV side files.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Value,
    pub files: Vec<(String, String)>,
}

impl Output {
    pub fn report_name(&self) -> String {
        format!("{}.json", self.report["command"].as_str().unwrap_or("report"))
    }

    pub fn report_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

fn emit(cfg: &RunConfig, out: &Output) -> Result<()> {
    match &cfg.output {
        None => {
            print!("{}", out.report_text());
            Ok(())
        }
        Some(dir) => {
            let dir = PathBuf::from(dir);
            fs::create_dir_all(&dir)
                .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
            write_file(&dir.join(out.report_name()), &out.report_text())?;
            for (name, body) in &out.files {
                write_file(&dir.join(name), body)?;
            }
            log::info!("wrote results to {}", dir.display());
            Ok(())
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs the command without touching the filesystem beyond reading input.
pub fn execute(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let tau = QuantileLevel::new(cfg.tau).map_err(|e| Error::Usage(e.to_string()))?;
    match cfg.command {
        Command::Fit => cmd_fit(cfg, tau),
        Command::Select => cmd_select(cfg, tau),
        Command::Simulate => cmd_simulate(cfg, tau),
        Command::Check => cmd_check(cfg),
    }
}

fn load(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg.input.as_deref().ok_or_else(|| Error::Usage("missing --input".into()))?;
    read_csv(path)
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    input: &'a Option<String>,
    tau: f64,
    lambda: Option<f64>,
    gamma: Option<f64>,
    lambda_grid: &'a Option<Vec<f64>>,
    gamma_grid: &'a Option<Vec<f64>>,
    seed: u64,
    fit: &'a crate::solver::FitConfig,
    bic: &'a BicConfig,
    sim: &'a SimSettings,
}

fn report(cfg: &RunConfig, result: Value, diagnostics: Value) -> Value {
    let echo = ConfigEcho {
        input: &cfg.input,
        tau: cfg.tau,
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        lambda_grid: &cfg.lambda_grid,
        gamma_grid: &cfg.gamma_grid,
        seed: cfg.seed,
        fit: &cfg.fit,
        bic: &cfg.bic,
        sim: &cfg.sim,
    };
    let command = serde_json::to_value(cfg.command).expect("command serializes");
    json!({
        "command": command,
        "config": echo,
        "result": result,
        "diagnostics": diagnostics,
        "version": VERSION,
    })
}

fn tolerances(cfg: &RunConfig) -> Value {
    json!({
        "obj_tol": cfg.fit.obj_tol,
        "zero_tol": cfg.fit.zero_tol,
        "max_outer": cfg.fit.max_outer,
        "max_sweeps": cfg.fit.max_sweeps,
        "loss_floor": cfg.bic.loss_floor,
        "singular_ratio": crate::inference::SINGULAR_RATIO,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn cmd_fit(cfg: &RunConfig, tau: QuantileLevel) -> Result<Output> {
    let ds = load(cfg)?;
    let default = simulation::default_tuning(ds.n(), ds.d(), 1.0);
    let tuning = SeloTuning::new(
        cfg.lambda.unwrap_or(default.lambda),
        cfg.gamma.unwrap_or(default.gamma),
    )
    .map_err(|e| Error::Usage(e.to_string()))?;
    let res: FitResult = fit(&ds, tau, tuning, &cfg.fit, None)?;
    let diagnostics = json!({
        "n": ds.n(),
        "d": ds.d(),
        "seed": cfg.seed,
        "converged": res.converged,
        "outer_iters": res.outer_iters,
        "tolerances": tolerances(cfg),
    });
    Ok(Output {
        report: report(cfg, to_value(&res), diagnostics),
        files: Vec::new(),
    })
}

fn resolved_bic(cfg: &RunConfig, ds: &Dataset, tau: QuantileLevel) -> BicConfig {
    let mut bic = cfg.bic.clone();
    bic.lambda_grid = match &cfg.lambda_grid {
        Some(g) => {
            let mut g = g.clone();
            g.sort_by(|a, b| b.total_cmp(a));
            g.dedup();
            g
        }
        None => selection::default_lambda_grid(ds, tau),
    };
    bic.gamma_grid = match &cfg.gamma_grid {
        Some(g) => g.clone(),
        None => selection::default_gamma_grid(ds.n(), ds.d()),
    };
    bic
}

fn cmd_select(cfg: &RunConfig, tau: QuantileLevel) -> Result<Output> {
    let ds = load(cfg)?;
    let bic = resolved_bic(cfg, &ds, tau);
    bic.validate()?;
    let sel: SelectionResult = selection::select(&ds, tau, &bic, &cfg.fit)?;
    let mut board = String::from("lambda_index,gamma_index,lambda,gamma,start,k_nonzero,mean_loss,bic,feasible\n");
    for c in &sel.scoreboard {
        let start = match c.start {
            crate::solver::StartKind::Cold => "cold",
            crate::solver::StartKind::Warm => "warm",
        };
        let _ = writeln!(
            board,
            "{},{},{},{},{},{},{},{},{}",
            c.lambda_index,
            c.gamma_index,
            fmt_num(c.score.lambda),
            fmt_num(c.score.gamma),
            start,
            c.score.k_nonzero,
            fmt_num(c.score.mean_loss),
            fmt_num(c.score.value),
            c.feasible
        );
    }
    let diagnostics = json!({
        "n": ds.n(),
        "d": ds.d(),
        "seed": cfg.seed,
        "lambda_grid": bic.lambda_grid,
        "gamma_grid": bic.gamma_grid,
        "sn": sel.sn,
        "cap": sel.cap,
        "excluded_count": sel.excluded_count,
        "converged": sel.fit.converged,
        "tolerances": tolerances(cfg),
    });
    Ok(Output {
        report: report(cfg, to_value(&sel), diagnostics),
        files: vec![("scoreboard.csv".into(), board)],
    })
}

/// Builds the simulation scenario described by the `sim` settings.
pub fn scenario_from(cfg: &RunConfig, tau: QuantileLevel) -> Result<SimScenario> {
    let s = &cfg.sim;
    let kind = match s.error {
        ErrorLaw::Normal => ErrorKind::Normal { sigma: s.error_param },
        ErrorLaw::StudentT => ErrorKind::StudentT { nu: s.error_param },
        ErrorLaw::Laplace => ErrorKind::Laplace { b: s.error_param },
        ErrorLaw::Cauchy => ErrorKind::Cauchy { s: s.error_param },
    };
    let law = make_error_dist(kind, tau).map_err(|e| Error::Usage(e.to_string()))?;
    let mut sc = SimScenario::new(s.beta0.clone(), s.n, law, cfg.seed, s.reps);
    if let Some(d) = s.d {
        sc = sc.resized(s.n, d);
    }
    sc.design = s.design;
    sc.estimator = s.estimator;
    sc.lambda_scale = s.lambda_scale;
    sc.ci_level = s.ci_level;
    if let (Some(lambda), Some(gamma)) = (cfg.lambda, cfg.gamma) {
        sc.tuning = Some(SeloTuning::new(lambda, gamma).map_err(|e| Error::Usage(e.to_string()))?);
    }
    sc.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(sc)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn cmd_simulate(cfg: &RunConfig, tau: QuantileLevel) -> Result<Output> {
    let sc = scenario_from(cfg, tau)?;
    let mut bic = cfg.bic.clone();
    bic.lambda_grid = cfg.lambda_grid.clone().unwrap_or_default();
    bic.gamma_grid = cfg.gamma_grid.clone().unwrap_or_default();
    let metrics: OracleMetrics = simulation::run_replications(&sc, &cfg.fit, &bic)?;

    let mut reps = String::from("rep,selected,true_positives,false_positives,exact,l2_error,z,covered,lambda,gamma,converged,failure\n");
    for r in &metrics.replications {
        let selected: Vec<String> = r.selected.iter().map(|j| j.to_string()).collect();
        let _ = writeln!(
            reps,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.rep,
            selected.join(" "),
            r.true_positives,
            r.false_positives,
            r.exact,
            fmt_num(r.l2_error),
            opt(r.z),
            r.covered.map(|c| c.to_string()).unwrap_or_default(),
            fmt_num(r.lambda),
            fmt_num(r.gamma),
            r.converged,
            r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }

    let mut qq = String::from("normal_quantile,z\n");
    let mut z = metrics.z_samples.clone();
    z.sort_by(f64::total_cmp);
    let phi = crate::inference::standard_normal();
    let m = z.len() as f64;
    for (i, v) in z.iter().enumerate() {
        use statrs::distribution::ContinuousCDF;
        let q = phi.inverse_cdf((i as f64 + 0.5) / m);
        let _ = writeln!(qq, "{},{}", fmt_num(q), fmt_num(*v));
    }

    let mut points = Vec::new();
    if cfg.sim.ladder.is_empty() {
        points.push(RatePoint {
            n: sc.n,
            d: sc.d,
            alpha_n: (sc.d as f64 / sc.n as f64).sqrt(),
            median_l2: metrics.median_l2,
            exact_recovery_rate: metrics.exact_recovery_rate,
        });
    } else {
        for &n in &cfg.sim.ladder {
            let (p, _) = RatePoint::measure(&sc, n, &cfg.fit, &bic)?;
            points.push(p);
        }
    }
    let mut rate = String::from("n,d,alpha_n,median_l2,log_alpha_n,log_median_l2,exact_recovery_rate\n");
    for p in &points {
        let _ = writeln!(
            rate,
            "{},{},{},{},{},{},{}",
            p.n,
            p.d,
            fmt_num(p.alpha_n),
            fmt_num(p.median_l2),
            fmt_num(p.alpha_n.ln()),
            fmt_num(p.median_l2.ln()),
            fmt_num(p.exact_recovery_rate)
        );
    }

    let diagnostics = json!({
        "n": sc.n,
        "d": sc.d,
        "seed": cfg.seed,
        "reps": sc.reps,
        "failures": metrics.failures,
        "error_shift": sc.error.shift,
        "error_density_at_zero": sc.error.f0,
        "tuning": (sc.estimator == simulation::Estimator::FixedTuning).then(|| sc.fixed_tuning()),
        "rate_points": points,
        "rate_slope": log_log_slope(&points),
        "tolerances": tolerances(cfg),
    });
    Ok(Output {
        report: report(cfg, to_value(&metrics), diagnostics),
        files: vec![
            ("replications.csv".into(), reps),
            ("qq.csv".into(), qq),
            ("rate.csv".into(), rate),
        ],
    })
}

fn cmd_check(cfg: &RunConfig) -> Result<Output> {
    let ds = load(cfg)?;
    let rep = assumption_report(&ds);
    let diagnostics = json!({
        "n": ds.n(),
        "d": ds.d(),
        "seed": cfg.seed,
        "condition_number": if rep.lambda_min > 0.0 { Some(rep.lambda_max / rep.lambda_min) } else { None },
        "tolerances": tolerances(cfg),
    });
    Ok(Output {
        report: report(cfg, to_value(&rep), diagnostics),
        files: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_with_input(cmd: Command, text: &str) -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        fs::write(&path, text).unwrap();
        let mut cfg = RunConfig::new(cmd);
        cfg.input = Some(path.to_string_lossy().into_owned());
        (dir, cfg)
    }

    #[test]
    fn dominating_penalty_zeroes_fit() {
        let (_d, mut cfg) = cfg_with_input(Command::Fit, "y,x1\n1.0,2.0\n-1.0,0.5\n");
        cfg.lambda = Some(10.0);
        cfg.gamma = Some(0.1);
        let out = execute(&cfg).unwrap();
        let beta = out.report["result"]["beta_hat"].as_array().unwrap();
        assert_eq!(beta.len(), 1);
        assert_eq!(beta[0].as_f64(), Some(0.0));
        assert_eq!(out.report["version"], VERSION);
        assert_eq!(run(&cfg), 0);
    }

    #[test]
    fn empty_grid_is_usage_error() {
        let (_d, mut cfg) = cfg_with_input(Command::Select, "y,x1\n1.0,2.0\n-1.0,0.5\n3,1\n");
        cfg.lambda_grid = Some(vec![]);
        assert!(matches!(execute(&cfg), Err(Error::Usage(_))));
        assert_eq!(run(&cfg), 1);
    }

    #[test]
    fn data_error_exit_code() {
        let (_d, cfg) = cfg_with_input(Command::Check, "y,x1\nNaN,2\n1,2\n");
        assert_eq!(run(&cfg), 2);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "tau = 0.3\nseed = 5\n").unwrap();
        let args = Args::try_parse_from([
            "selo-qr",
            "simulate",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
        ])
        .unwrap();
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.tau, 0.3);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.command, Command::Simulate);
    }
}
