//! Seeded Monte Carlo experiments over (policy × budget × run) grids.
//!
//! Run `r` of policy `p` at budget `T` draws its noise from a ChaCha8 stream
//! seeded with [`run_seed`]`(master_seed, p, T, r)`, so every record can be
//! reproduced in isolation and the thread count never changes the output.

pub mod cli;
pub mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{max_feasible_beta, optimal_arms, ArmModel, Bandit, FeasibleBeta, Setting};
use crate::error::{Error, Result};
use crate::estimator::WindowFraction;
use crate::policy::{Policy, RUcbe, RUcbeParams, SuccessiveRejects, UcbE, Uniform};
use crate::theory::{a_star_closed, a_star_formula, GapProfile};

pub use report::{summarize, wilson_interval, CellSummary};

pub const BUILTIN_SETTING_A: &str = "builtin:setting_a";

/// Table of `(c, b, ψ)` for the five-arm synthetic setting.
const SETTING_A_ARMS: [(f64, f64, f64); 5] = [
    (1.0, 37.0, 1.0),
    (0.88, 10.0, 1.0),
    (0.78, 1.0, 1.0),
    (0.7, 10.0, 1.0),
    (0.5, 20.0, 1.0),
];

pub fn setting_a() -> Setting {
    let arms = SETTING_A_ARMS
        .iter()
        .map(|&(c, b, psi)| ArmModel::parametric(c, b, psi).expect("valid builtin arm"))
        .collect();
    Setting::new(arms, 0.01).expect("valid builtin setting")
}

/// Setting A with every policy, budgets 100..=3200, 100 runs per cell.
pub fn builtin_setting_a() -> ExperimentSpec {
    let policies = [
        PolicyId::RUcbe,
        PolicyId::RSr,
        PolicyId::Uniform,
        PolicyId::UniformWindow,
        PolicyId::Sr,
        PolicyId::UcbE,
    ]
    .into_iter()
    .map(PolicyConfig::new)
    .collect();
    ExperimentSpec {
        setting: setting_a(),
        policies,
        budgets: vec![100, 200, 400, 800, 1600, 3200],
        runs: 100,
        master_seed: 42,
        epsilon: WindowFraction::new(0.25).expect("valid"),
        sigma_override: None,
        beta: Some(1.3),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PolicyId {
    #[serde(rename = "r_ucbe")]
    RUcbe,
    #[serde(rename = "r_sr")]
    RSr,
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "uniform_window")]
    UniformWindow,
    #[serde(rename = "sr")]
    Sr,
    #[serde(rename = "ucb_e")]
    UcbE,
}

impl PolicyId {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyId::RUcbe => "r_ucbe",
            PolicyId::RSr => "r_sr",
            PolicyId::Uniform => "uniform",
            PolicyId::UniformWindow => "uniform_window",
            PolicyId::Sr => "sr",
            PolicyId::UcbE => "ucb_e",
        }
    }
}

/// Exploration parameter as written in a config: `"auto"`, a number, or
/// `{"scale": x}` meaning `x` times the automatic value.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawExploration", into = "RawExploration")]
pub enum Exploration {
    #[default]
    Auto,
    Fixed(f64),
    Scaled(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawExploration {
    Number(f64),
    Word(String),
    Scale { scale: f64 },
}

impl TryFrom<RawExploration> for Exploration {
    type Error = String;

    fn try_from(raw: RawExploration) -> std::result::Result<Self, String> {
        let finite_nonneg = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(format!("{what} must be finite and >= 0, got {v}"))
            }
        };
        match raw {
            RawExploration::Number(a) => finite_nonneg(a, "a").map(Exploration::Fixed),
            RawExploration::Word(w) if w == "auto" => Ok(Exploration::Auto),
            RawExploration::Word(w) => Err(format!("unknown exploration value {w:?}")),
            RawExploration::Scale { scale } => finite_nonneg(scale, "scale").map(Exploration::Scaled),
        }
    }
}

impl From<Exploration> for RawExploration {
    fn from(e: Exploration) -> Self {
        match e {
            Exploration::Auto => RawExploration::Word("auto".into()),
            Exploration::Fixed(a) => RawExploration::Number(a),
            Exploration::Scaled(scale) => RawExploration::Scale { scale },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub id: PolicyId,
    /// Name used in outputs and seed derivation; defaults to the id, with a
    /// suffix for non-automatic R-UCBE exploration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Exploration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<WindowFraction>,
}

impl PolicyConfig {
    pub fn new(id: PolicyId) -> Self {
        PolicyConfig { id, label: None, a: None, epsilon: None }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match (self.id, self.a) {
            (PolicyId::RUcbe, Some(Exploration::Fixed(a))) => format!("r_ucbe[a={a}]"),
            (PolicyId::RUcbe, Some(Exploration::Scaled(s))) => format!("r_ucbe[{s}a*]"),
            (PolicyId::UcbE, Some(Exploration::Fixed(a))) => format!("ucb_e[a={a}]"),
            (id, _) => id.as_str().to_owned(),
        }
    }

    fn check(&self) -> Result<()> {
        match (self.id, self.a) {
            (PolicyId::RUcbe, _) | (PolicyId::UcbE, None | Some(Exploration::Auto | Exploration::Fixed(_))) => {}
            (PolicyId::UcbE, Some(Exploration::Scaled(_))) => {
                return Err(Error::config("ucb_e accepts \"auto\" or a number for a"));
            }
            (id, Some(_)) => return Err(Error::config(format!("{} takes no exploration parameter", id.as_str()))),
            (_, None) => {}
        }
        if self.epsilon.is_some() && !matches!(self.id, PolicyId::RUcbe | PolicyId::RSr) {
            return Err(Error::config(format!("{} takes no epsilon", self.id.as_str())));
        }
        if matches!(&self.label, Some(l) if l.is_empty() || l.contains([',', '"', '\n'])) {
            return Err(Error::config("policy labels must be non-empty and free of commas, quotes and newlines"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub setting: Setting,
    pub policies: Vec<PolicyConfig>,
    pub budgets: Vec<usize>,
    pub runs: usize,
    pub master_seed: u64,
    pub epsilon: WindowFraction,
    /// Re-run the whole grid once per noise level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_override: Option<Vec<f64>>,
    /// β used for automatic exploration; defaults to the setting's largest
    /// feasible β over the largest budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    setting: SettingSource,
    policies: Vec<PolicyConfig>,
    budgets: Vec<usize>,
    #[serde(default = "default_runs")]
    runs: usize,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_epsilon")]
    epsilon: WindowFraction,
    #[serde(default)]
    sigma_override: Option<Vec<f64>>,
    #[serde(default)]
    beta: Option<f64>,
}

fn default_runs() -> usize {
    100
}

fn default_epsilon() -> WindowFraction {
    WindowFraction::new(0.25).expect("valid")
}

/// A setting given inline, as a path relative to the config, or by builtin name.
#[derive(Deserialize)]
#[serde(untagged)]
enum SettingSource {
    Inline(Setting),
    Reference(String),
}

impl SettingSource {
    fn resolve(self, base: Option<&Path>) -> Result<Setting> {
        match self {
            SettingSource::Inline(s) => {
                s.check()?;
                Ok(s)
            }
            SettingSource::Reference(r) if r == BUILTIN_SETTING_A => Ok(setting_a()),
            SettingSource::Reference(r) => {
                let path = match base {
                    Some(dir) => dir.join(&r),
                    None => PathBuf::from(&r),
                };
                Setting::load(&path)
            }
        }
    }
}

impl ExperimentSpec {
    /// Parses a config document. Relative setting paths resolve against `base`.
    pub fn from_json_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawExperiment =
            serde_json::from_str(text).map_err(|e| Error::config(format!("experiment config: {e}")))?;
        let spec = ExperimentSpec {
            setting: raw.setting.resolve(base)?,
            policies: raw.policies,
            budgets: raw.budgets,
            runs: raw.runs,
            master_seed: raw.master_seed,
            epsilon: raw.epsilon,
            sigma_override: raw.sigma_override,
            beta: raw.beta,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Loads a config file, or the builtin experiment for `builtin:setting_a`.
    pub fn load(path: &Path) -> Result<Self> {
        if path.as_os_str() == BUILTIN_SETTING_A {
            return Ok(builtin_setting_a());
        }
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json_str(&text, path.parent())
    }

    pub fn check(&self) -> Result<()> {
        self.setting.check()?;
        if self.runs == 0 {
            return Err(Error::config("runs must be >= 1"));
        }
        if self.policies.is_empty() || self.budgets.is_empty() {
            return Err(Error::config("at least one policy and one budget are required"));
        }
        if !self.budgets.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("budgets must be strictly increasing"));
        }
        let k = self.setting.num_arms();
        if self.budgets[0] < k {
            return Err(Error::config(format!("every budget must be >= K = {k}")));
        }
        let mut labels = BTreeSet::new();
        for p in &self.policies {
            p.check()?;
            if !labels.insert(p.label()) {
                return Err(Error::config(format!("duplicate policy label {:?}", p.label())));
            }
        }
        if let Some(sigmas) = &self.sigma_override {
            if sigmas.is_empty() || sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::config("sigma_override must list finite, non-negative values"));
            }
        }
        if let Some(beta) = self.beta {
            if !(beta > 1.0 && beta.is_finite()) {
                return Err(Error::config(format!("beta must be finite and > 1, got {beta}")));
            }
        }
        Ok(())
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        let mut spec = self.clone();
        spec.setting.sigma = sigma;
        spec.sigma_override = None;
        spec
    }

    /// Noise levels the grid runs at, in config order.
    pub fn sigmas(&self) -> Vec<f64> {
        self.sigma_override.clone().unwrap_or_else(|| vec![self.setting.sigma])
    }

    pub fn max_budget(&self) -> usize {
        *self.budgets.last().expect("checked non-empty")
    }

    /// β for automatic exploration: the configured value, else the largest
    /// feasible β over `[1, max budget]`.
    pub fn resolve_beta(&self) -> Result<f64> {
        if let Some(b) = self.beta {
            return Ok(b);
        }
        match max_feasible_beta(&self.setting.arms, self.max_budget())? {
            Some(FeasibleBeta::Bounded(b)) => Ok(b),
            Some(FeasibleBeta::Unbounded) => Err(Error::config(
                "increments never bind, so beta is unbounded; set \"beta\" explicitly",
            )),
            None => Err(Error::config("no beta > 1 fits the setting; set \"beta\" explicitly")),
        }
    }

    /// Every (policy, budget) cell with its parameters fixed, in canonical
    /// (label, T) order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        self.check()?;
        let k = self.setting.num_arms();
        if let Some(max) = self.setting.max_budget() {
            if max < self.max_budget() {
                return Err(Error::range(format!(
                    "tabulated arms cover {max} pulls but the largest budget is {}",
                    self.max_budget()
                )));
            }
        }
        let needs_beta = self
            .policies
            .iter()
            .any(|p| p.id == PolicyId::RUcbe && !matches!(p.a, Some(Exploration::Fixed(_))));
        let beta = if needs_beta { Some(self.resolve_beta()?) } else { None };
        let mut cells = Vec::new();
        for p in &self.policies {
            for &budget in &self.budgets {
                let eps = p.epsilon.unwrap_or(self.epsilon);
                let params = match p.id {
                    PolicyId::RUcbe => {
                        let auto = || auto_exploration(&self.setting, budget, beta.expect("resolved"), eps);
                        let a = match p.a.unwrap_or_default() {
                            Exploration::Fixed(a) => a,
                            Exploration::Auto => auto()?,
                            Exploration::Scaled(s) => s * auto()?,
                        };
                        PolicyParams::RUcbe { a, epsilon: eps }
                    }
                    PolicyId::RSr => PolicyParams::RSr { epsilon: eps },
                    PolicyId::Uniform => PolicyParams::Uniform,
                    PolicyId::UniformWindow => PolicyParams::UniformWindow,
                    PolicyId::Sr => PolicyParams::Sr,
                    PolicyId::UcbE => {
                        let a = match p.a {
                            Some(Exploration::Fixed(a)) => a,
                            _ => UcbE::exploration_from_gaps(&GapProfile::new(&self.setting.arms, budget)?)?,
                        };
                        PolicyParams::UcbE { a }
                    }
                };
                // Building once surfaces parameter errors before any run starts.
                params.build(budget, k, self.setting.sigma)?;
                cells.push(Cell { label: p.label(), id: p.id, budget, params });
            }
        }
        cells.sort_by(|x, y| (&x.label, x.budget).cmp(&(&y.label, y.budget)));
        Ok(cells)
    }
}

/// Automatic R-UCBE exploration at budget `T`: the explicit threshold when
/// its margin is non-negative, otherwise the unchecked formula value.
pub fn auto_exploration(setting: &Setting, budget: usize, beta: f64, epsilon: WindowFraction) -> Result<f64> {
    if setting.sigma == 0.0 {
        // Every confidence width is σ times something, so a is irrelevant.
        return Ok(0.0);
    }
    let gaps = GapProfile::new(&setting.arms, budget)?;
    match a_star_closed(&gaps, beta, epsilon, setting.sigma)? {
        Some(a) => Ok(a),
        None => a_star_formula(&gaps, beta, epsilon, setting.sigma),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyParams {
    RUcbe { a: f64, epsilon: WindowFraction },
    RSr { epsilon: WindowFraction },
    Uniform,
    UniformWindow,
    Sr,
    UcbE { a: f64 },
}

impl PolicyParams {
    pub fn build(&self, budget: usize, arms: usize, sigma: f64) -> Result<Box<dyn Policy>> {
        Ok(match *self {
            PolicyParams::RUcbe { a, epsilon } => {
                Box::new(RUcbe::new(RUcbeParams { a, epsilon, sigma, budget, arms })?)
            }
            PolicyParams::RSr { epsilon } => Box::new(SuccessiveRejects::rising(budget, arms, epsilon)?),
            PolicyParams::Uniform => Box::new(Uniform::new(budget, arms, false)?),
            PolicyParams::UniformWindow => Box::new(Uniform::new(budget, arms, true)?),
            PolicyParams::Sr => Box::new(SuccessiveRejects::stationary(budget, arms)?),
            PolicyParams::UcbE { a } => Box::new(UcbE::new(budget, arms, a)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub label: String,
    pub id: PolicyId,
    pub budget: usize,
    pub params: PolicyParams,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub policy: String,
    pub budget: usize,
    pub run: usize,
    pub seed: u64,
    pub recommended: usize,
    pub correct: bool,
    /// Rounds in which an arm was actually pulled.
    pub pulls: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer applied after a golden-ratio increment.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// `s(s(s(s(master) ^ fnv(label)) ^ T) ^ run)` with `s` = [`splitmix64`], `fnv` = [`fnv1a64`].
pub fn run_seed(master_seed: u64, label: &str, budget: usize, run: usize) -> u64 {
    let h = splitmix64(splitmix64(master_seed) ^ fnv1a64(label.as_bytes()));
    splitmix64(splitmix64(h ^ budget as u64) ^ run as u64)
}

/// Drives `policy` for exactly its budget and returns the recommendation and
/// the number of non-idle rounds.
pub fn play(policy: &mut dyn Policy, bandit: &mut Bandit<'_>) -> Result<(usize, usize)> {
    for _ in 0..policy.budget() {
        if let Some(arm) = policy.choose()? {
            let reward = bandit.pull(arm)?;
            policy.observe(arm, reward)?;
        }
    }
    let pulls = bandit.rounds();
    if pulls > policy.budget() {
        return Err(Error::State(format!("{pulls} pulls exceed the budget {}", policy.budget())));
    }
    Ok((policy.recommend()?, pulls))
}

pub fn run_one(setting: &Setting, cell: &Cell, master_seed: u64, run: usize) -> Result<RunRecord> {
    let seed = run_seed(master_seed, &cell.label, cell.budget, run);
    let start = Instant::now();
    let mut policy = cell.params.build(cell.budget, setting.num_arms(), setting.sigma)?;
    let mut bandit = Bandit::new(&setting.arms, setting.sigma, seed)?;
    let (recommended, pulls) = play(policy.as_mut(), &mut bandit)?;
    let elapsed = start.elapsed();
    // Ground truth comes from the curves, not from anything the policy saw.
    let correct = optimal_arms(&setting.arms, cell.budget)?.contains(&recommended);
    Ok(RunRecord { policy: cell.label.clone(), budget: cell.budget, run, seed, recommended, correct, pulls, elapsed })
}

/// All runs of one cell, in run order.
pub fn run_cell(spec: &ExperimentSpec, cell: &Cell) -> Result<Vec<RunRecord>> {
    (0..spec.runs)
        .into_par_iter()
        .map(|r| run_one(&spec.setting, cell, spec.master_seed, r))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub sigma: f64,
    /// Sorted by (policy, T, run).
    pub records: Vec<RunRecord>,
    /// Sorted by (policy, T).
    pub summaries: Vec<CellSummary>,
}

/// Runs the full grid at the experiment's own σ on a pool of `threads` workers.
pub fn run_experiment(spec: &ExperimentSpec, threads: usize) -> Result<ExperimentResult> {
    let cells = spec.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::State(format!("thread pool: {e}")))?;
    let jobs: Vec<(&Cell, usize)> = cells.iter().flat_map(|c| (0..spec.runs).map(move |r| (c, r))).collect();
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, r)| run_one(&spec.setting, cell, spec.master_seed, r))
            .collect::<Result<_>>()
    })?;
    // Jobs were generated in canonical order and collect preserves it.
    let summaries = records
        .chunks(spec.runs)
        .map(summarize)
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { sigma: spec.setting.sigma, records, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        let mut spec = builtin_setting_a();
        spec.budgets = vec![50, 200];
        spec.runs = 8;
        spec
    }

    #[test]
    fn builtin_setting_a_facts() {
        let spec = builtin_setting_a();
        assert_eq!(spec.setting.num_arms(), 5);
        assert_eq!(spec.setting.sigma, 0.01);
        assert_eq!(spec.epsilon.get(), 0.25);
        // Zero-based: the first arm in the table.
        assert_eq!(optimal_arms(&spec.setting.arms, 3200).unwrap(), vec![0]);
        assert_eq!(spec.budgets.first(), Some(&100));
        assert_eq!(spec.budgets.last(), Some(&3200));
    }

    #[test]
    fn seeds_depend_on_every_coordinate() {
        let base = run_seed(42, "r_ucbe", 400, 0);
        assert_eq!(base, run_seed(42, "r_ucbe", 400, 0));
        for other in [
            run_seed(43, "r_ucbe", 400, 0),
            run_seed(42, "r_sr", 400, 0),
            run_seed(42, "r_ucbe", 401, 0),
            run_seed(42, "r_ucbe", 400, 1),
        ] {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xAF63_DC4C_8601_EC8C);
    }

    #[test]
    fn splitmix_reference_value() {
        // First output of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn same_spec_twice_gives_same_records() {
        let spec = small_spec();
        let a = run_experiment(&spec, 1).unwrap();
        let b = run_experiment(&spec, 3).unwrap();
        let strip = |r: &ExperimentResult| {
            r.records.iter().map(|x| (x.policy.clone(), x.budget, x.run, x.seed, x.recommended)).collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn run_cell_matches_grid() {
        let spec = small_spec();
        let cells = spec.cells().unwrap();
        let grid = run_experiment(&spec, 2).unwrap();
        let cell = &cells[3];
        let records = run_cell(&spec, cell).unwrap();
        let from_grid: Vec<_> =
            grid.records.iter().filter(|r| r.policy == cell.label && r.budget == cell.budget).collect();
        assert_eq!(records.len(), spec.runs);
        for (x, y) in records.iter().zip(from_grid) {
            assert_eq!((x.seed, x.recommended, x.correct), (y.seed, y.recommended, y.correct));
        }
    }

    #[test]
    fn every_run_spends_at_most_its_budget() {
        let spec = small_spec();
        let res = run_experiment(&spec, 2).unwrap();
        assert_eq!(res.records.len(), 6 * 2 * 8);
        for r in &res.records {
            assert!(r.pulls <= r.budget);
            if !r.policy.contains("sr") {
                assert_eq!(r.pulls, r.budget);
            }
        }
    }

    #[test]
    fn cells_are_canonically_sorted() {
        let cells = small_spec().cells().unwrap();
        let keys: Vec<_> = cells.iter().map(|c| (c.label.clone(), c.budget)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn config_parsing() {
        let text = r#"{
            "setting": {"arms": [{"kind":"parametric","c":1,"b":2,"psi":1},
                                 {"kind":"tabulated","values":[0.1,0.2,0.3,0.4,0.5,0.55,0.6,0.65,0.7,0.7]}],
                        "sigma": 0.1},
            "policies": [{"id":"r_ucbe","a":{"scale":10}}, {"id":"r_ucbe","a":3}, {"id":"ucb_e"},
                         {"id":"r_sr","epsilon":0.1,"label":"rsr-narrow"}],
            "budgets": [4, 8],
            "runs": 3,
            "master_seed": 7,
            "beta": 1.2
        }"#;
        let spec = ExperimentSpec::from_json_str(text, None).unwrap();
        assert_eq!(spec.policies[0].a, Some(Exploration::Scaled(10.0)));
        assert_eq!(spec.policies[1].a, Some(Exploration::Fixed(3.0)));
        let labels: Vec<_> = spec.policies.iter().map(PolicyConfig::label).collect();
        assert_eq!(labels, ["r_ucbe[10a*]", "r_ucbe[a=3]", "ucb_e", "rsr-narrow"]);
        assert_eq!(spec.epsilon.get(), 0.25);
        spec.cells().unwrap();
    }

    #[test]
    fn config_errors() {
        let setting = r#"{"arms":[{"kind":"parametric","c":1,"b":2,"psi":1},{"kind":"parametric","c":0.5,"b":2,"psi":1}],"sigma":0.1}"#;
        let cases = [
            r#""policies":[{"id":"nope"}],"budgets":[10]"#,
            r#""policies":[{"id":"uniform"}],"budgets":[10,10]"#,
            r#""policies":[{"id":"uniform"}],"budgets":[1]"#,
            r#""policies":[{"id":"uniform"}],"budgets":[10],"runs":0"#,
            r#""policies":[{"id":"uniform"},{"id":"uniform"}],"budgets":[10]"#,
            r#""policies":[{"id":"uniform","a":3}],"budgets":[10]"#,
            r#""policies":[{"id":"r_ucbe","a":"max"}],"budgets":[10]"#,
            r#""policies":[{"id":"r_ucbe","a":-1}],"budgets":[10]"#,
            r#""policies":[{"id":"uniform"}],"budgets":[10],"extra":1"#,
            r#""policies":[{"id":"r_sr","epsilon":0.5}],"budgets":[10]"#,
        ];
        for case in cases {
            let text = format!("{{\"setting\":{setting},{case}}}");
            let err = ExperimentSpec::from_json_str(&text, None).unwrap_err();
            assert!(err.is_config(), "{case}: {err}");
        }
    }

    #[test]
    fn short_table_is_a_range_error() {
        let text = r#"{"setting":{"arms":[{"kind":"tabulated","values":[0.1,0.2,0.3]},
                                         {"kind":"tabulated","values":[0.2,0.2,0.2]}],"sigma":0},
                       "policies":[{"id":"uniform"}],"budgets":[2,5]}"#;
        let spec = ExperimentSpec::from_json_str(text, None).unwrap();
        assert!(matches!(spec.cells(), Err(Error::Range(_))));
    }

    #[test]
    fn auto_exploration_falls_back_to_formula() {
        let s = setting_a();
        let eps = WindowFraction::new(0.25).unwrap();
        let gaps = GapProfile::new(&s.arms, 3200).unwrap();
        assert_eq!(a_star_closed(&gaps, 1.3, eps, s.sigma).unwrap(), None);
        let a = auto_exploration(&s, 3200, 1.3, eps).unwrap();
        assert_eq!(a, a_star_formula(&gaps, 1.3, eps, s.sigma).unwrap());
        assert!(a > 100.0);
    }

    #[test]
    fn sigma_override_sets_noise() {
        let mut spec = small_spec();
        spec.sigma_override = Some(vec![0.1, 0.5]);
        assert_eq!(spec.sigmas(), vec![0.1, 0.5]);
        assert_eq!(spec.with_sigma(0.5).setting.sigma, 0.5);
    }
}
