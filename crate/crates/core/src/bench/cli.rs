//! Command-line front end: `run`, `theory` and `validate`.
//!
//! Exit codes: 0 on success, 1 for usage or configuration problems
//! (anything detected before simulation starts), 2 for runtime failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use super::report::{emit_csv, emit_json, emit_runs_csv, fmt_sig10, summary_csv};
use super::{run_experiment, ExperimentSpec, BUILTIN_SETTING_A};
use crate::env::{max_feasible_beta, validate_assumptions, FeasibleBeta, Setting};
use crate::error::{Error, Result};
use crate::estimator::WindowFraction;
use crate::theory::{
    a_star_closed, a_star_formula, a_star_implicit, c_beta, last_optimal_change, rsr_budget_ok, rsr_error_bound,
    rucbe_error_bound, GapProfile,
};

pub const THREADS_ENV: &str = "RISING_BAI_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rising-bai", version, about = "Best arm identification benchmarks for rising rested bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment grid and write summary.csv, summary.json and runs.csv.
    Run {
        /// Experiment config, or `builtin:setting_a`.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Worker threads; overridden by RISING_BAI_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Replaces the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave mean_ms empty so reruns produce byte-identical files.
        #[arg(long)]
        no_timing: bool,
    },
    /// Print gaps, complexity indices, thresholds and error bounds as JSON.
    Theory {
        /// Experiment config or bare setting file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        beta: f64,
        /// Defaults to the experiment's epsilon, or 0.25.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Defaults to the setting's sigma.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Check the config and the rising assumptions; report the largest feasible β.
    Validate {
        /// Experiment config or bare setting file.
        #[arg(long)]
        config: PathBuf,
        /// Pull horizon for the checks; defaults to the largest budget.
        #[arg(long)]
        horizon: Option<usize>,
    },
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

fn config<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn runtime<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run { config, out_dir, threads, seed, no_timing } => {
            cmd_run(&config, &out_dir, threads, seed, no_timing, stdout)
        }
        Command::Theory { config, budget, beta, epsilon, sigma } => {
            cmd_theory(&config, budget, beta, epsilon, sigma, stdout)
        }
        Command::Validate { config, horizon } => cmd_validate(&config, horizon, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "rising-bai: {}", f.error());
            f.code()
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        };
    }
    match flag {
        Some(0) => Err(Error::config("--threads must be positive")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn cmd_run(
    path: &Path,
    out_dir: &Path,
    threads: Option<usize>,
    seed: Option<u64>,
    no_timing: bool,
    stdout: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let mut spec = config(ExperimentSpec::load(path))?;
    if let Some(s) = seed {
        spec.master_seed = s;
    }
    let threads = config(resolve_threads(threads))?;
    let sigmas = spec.sigmas();
    let per_sigma: Vec<ExperimentSpec> = sigmas.iter().map(|&s| spec.with_sigma(s)).collect();
    // Resolve every cell up front so parameter problems exit with code 1.
    for s in &per_sigma {
        config(s.cells())?;
    }
    for s in &per_sigma {
        let dir = match spec.sigma_override {
            Some(_) => out_dir.join(format!("sigma_{}", fmt_sig10(s.setting.sigma))),
            None => out_dir.to_owned(),
        };
        let mut result = runtime(run_experiment(s, threads))?;
        if no_timing {
            result.summaries.iter_mut().for_each(|c| c.mean_ms = None);
        }
        runtime(std::fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source }))?;
        runtime(emit_csv(&result.summaries, &dir.join("summary.csv")))?;
        runtime(emit_json(&result.summaries, &dir.join("summary.json")))?;
        runtime(emit_runs_csv(&result.records, &dir.join("runs.csv")))?;
        if spec.sigma_override.is_some() {
            let _ = writeln!(stdout, "# sigma = {}", fmt_sig10(s.setting.sigma));
        }
        let _ = write!(stdout, "{}", summary_csv(&result.summaries));
    }
    Ok(())
}

/// A config file holding either a full experiment or just a setting.
enum Target {
    Experiment(Box<ExperimentSpec>),
    Setting(Setting),
}

impl Target {
    fn load(path: &Path) -> Result<Self> {
        if path.as_os_str() == BUILTIN_SETTING_A {
            return Ok(Target::Experiment(Box::new(ExperimentSpec::load(path)?)));
        }
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        let value: Value =
            serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })?;
        if value.get("arms").is_some() {
            Ok(Target::Setting(Setting::from_json_str(&text)?))
        } else {
            Ok(Target::Experiment(Box::new(ExperimentSpec::from_json_str(&text, path.parent())?)))
        }
    }

    fn setting(&self) -> &Setting {
        match self {
            Target::Experiment(s) => &s.setting,
            Target::Setting(s) => s,
        }
    }

    fn epsilon(&self) -> Option<WindowFraction> {
        match self {
            Target::Experiment(s) => Some(s.epsilon),
            Target::Setting(_) => None,
        }
    }
}

#[derive(Serialize)]
struct TheoryReport {
    #[serde(rename = "T")]
    budget: usize,
    #[serde(rename = "K")]
    arms: usize,
    beta: f64,
    epsilon: f64,
    sigma: f64,
    optimal_arm: usize,
    gaps: Vec<Value>,
    /// Explicit threshold, `null` when its margin is negative.
    a_star: Option<f64>,
    a_star_margin_ok: bool,
    /// The explicit formula without the sign check.
    a_star_unchecked: Option<f64>,
    /// Threshold from the true increments.
    a_star_implicit: Option<f64>,
    #[serde(rename = "H1")]
    h1: f64,
    /// Exponent of `H1` used by the explicit threshold.
    #[serde(rename = "H1_eta")]
    h1_eta: f64,
    #[serde(rename = "H2")]
    h2: f64,
    #[serde(rename = "C_beta")]
    c_beta: f64,
    #[serde(rename = "Psi_beta")]
    psi_beta: f64,
    budget_ok: bool,
    budget_required: f64,
    bounds: Value,
}

fn cmd_theory(
    path: &Path,
    budget: usize,
    beta: f64,
    epsilon: Option<f64>,
    sigma: Option<f64>,
    stdout: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let target = config(Target::load(path))?;
    let setting = target.setting();
    let eps = match epsilon {
        Some(e) => config(WindowFraction::new(e))?,
        None => target.epsilon().unwrap_or(config(WindowFraction::new(0.25))?),
    };
    let sigma = sigma.unwrap_or(setting.sigma);
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Failure::Config(Error::config("sigma must be finite and >= 0")));
    }
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Failure::Config(Error::config(format!("beta must be finite and > 1, got {beta}"))));
    }
    let k = setting.num_arms();
    if budget < k {
        return Err(Failure::Config(Error::config(format!("budget must be >= K = {k}"))));
    }
    let gaps = config(GapProfile::new(&setting.arms, budget))?;
    let (closed, unchecked) = if sigma > 0.0 {
        (runtime(a_star_closed(&gaps, beta, eps, sigma))?, Some(runtime(a_star_formula(&gaps, beta, eps, sigma))?))
    } else {
        (None, None)
    };
    let implicit = runtime(a_star_implicit(&setting.arms, budget, eps, sigma))?;
    let eta = if beta < 1.5 { 1.0 / beta } else { 2.0 / 3.0 };
    let check = runtime(rsr_budget_ok(&gaps, beta))?;
    let rsr_bound = if budget > k { Some(runtime(rsr_error_bound(&gaps, eps, sigma))?) } else { None };
    let rucbe_a = closed.or(unchecked);
    let report = TheoryReport {
        budget,
        arms: k,
        beta,
        epsilon: eps.get(),
        sigma,
        optimal_arm: gaps.optimal,
        gaps: gaps.gaps.iter().map(|&(arm, gap)| json!({"arm": arm, "gap": gap})).collect(),
        a_star: closed,
        a_star_margin_ok: closed.is_some(),
        a_star_unchecked: unchecked,
        a_star_implicit: implicit,
        h1: gaps.h1(eta),
        h1_eta: eta,
        h2: gaps.h2(),
        c_beta: c_beta(beta, k),
        psi_beta: gaps.psi_beta(beta),
        budget_ok: check.ok,
        budget_required: check.required,
        bounds: json!({
            "r_ucbe": rucbe_a.map(|a| rucbe_error_bound(a, budget, k)),
            "r_ucbe_a": rucbe_a,
            "r_sr": rsr_bound,
        }),
    };
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_validate(path: &Path, horizon: Option<usize>, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let target = config(Target::load(path))?;
    let setting = target.setting();
    let horizon = match (horizon, &target) {
        (Some(h), _) => h,
        (None, Target::Experiment(spec)) => spec.max_budget(),
        (None, Target::Setting(s)) => s.max_budget().ok_or_else(|| {
            Failure::Config(Error::config("a bare parametric setting needs --horizon"))
        })?,
    };
    let mut arms = Vec::new();
    for (i, arm) in setting.arms.iter().enumerate() {
        let r = config(validate_assumptions(arm, horizon))?;
        arms.push(json!({"arm": i, "monotone": r.monotone, "concave": r.concave}));
    }
    let beta = match config(max_feasible_beta(&setting.arms, horizon))? {
        Some(FeasibleBeta::Bounded(b)) => json!(b),
        Some(FeasibleBeta::Unbounded) => json!("unbounded"),
        None => Value::Null,
    };
    let crossover_horizon = setting.max_budget().map_or(horizon, |m| m.min(horizon));
    let mut report = json!({
        "horizon": horizon,
        "arms": arms,
        "assumptions_hold": arms.iter().all(|a| a["monotone"] == true && a["concave"] == true),
        "max_feasible_beta": beta,
        "last_optimal_change": config(last_optimal_change(&setting.arms, crossover_horizon))?,
    });
    if let Target::Experiment(spec) = &target {
        let mut cells = 0;
        for s in spec.sigmas() {
            cells += config(spec.with_sigma(s).cells())?.len();
        }
        report["cells"] = json!(cells);
        report["runs_per_cell"] = json!(spec.runs);
        if let Some(b) = spec.beta {
            report["configured_beta"] = json!(b);
        }
    }
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
