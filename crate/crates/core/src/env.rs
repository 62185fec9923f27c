//! Rising rested bandit environments.
//!
//! An arm's expected reward depends only on how many times that arm has been
//! pulled. `μ(n)` is the mean of the reward observed on the `n`-th pull, and
//! for parametric arms it equals `f(n)`, the curve value after `n` pulls.

use std::fmt;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking monotonicity and concavity of a curve.
pub const ASSUMPTION_TOL: f64 = 1e-12;

/// `f(x) = c·(1 − b / (b^{1/ψ} + x)^ψ)`, a non-decreasing concave curve with
/// `f(0) = 0` and `sup f = c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParametric")]
pub struct ParametricArm {
    c: f64,
    b: f64,
    psi: f64,
}

#[derive(Deserialize)]
struct RawParametric {
    c: f64,
    b: f64,
    psi: f64,
}

impl TryFrom<RawParametric> for ParametricArm {
    type Error = Error;

    fn try_from(raw: RawParametric) -> Result<Self> {
        ParametricArm::new(raw.c, raw.b, raw.psi)
    }
}

impl ParametricArm {
    pub fn new(c: f64, b: f64, psi: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::config(format!("parametric arm: c must lie in (0, 1], got {c}")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::config(format!("parametric arm: b must be finite and >= 0, got {b}")));
        }
        if !(psi > 0.0 && psi <= 1.0) {
            return Err(Error::config(format!("parametric arm: psi must lie in (0, 1], got {psi}")));
        }
        Ok(ParametricArm { c, b, psi })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    // b / (b^{1/ψ} + x)^ψ
    fn decay(&self, x: f64) -> f64 {
        if self.b == 0.0 {
            return 0.0;
        }
        self.b / (self.b.powf(1.0 / self.psi) + x).powf(self.psi)
    }

    /// Curve value at a real abscissa `x ≥ 0`.
    pub fn value_at(&self, x: f64) -> f64 {
        if self.b == 0.0 && x == 0.0 {
            return 0.0;
        }
        self.c * (1.0 - self.decay(x))
    }

    fn increment(&self, n: usize) -> f64 {
        let x = n as f64;
        self.c * (self.decay(x) - self.decay(x + 1.0))
    }
}

/// Expected rewards given pull by pull: `values[k]` is `μ(k + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTabulated")]
pub struct TabulatedArm {
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTabulated {
    values: Vec<f64>,
}

impl TryFrom<RawTabulated> for TabulatedArm {
    type Error = Error;

    fn try_from(raw: RawTabulated) -> Result<Self> {
        TabulatedArm::new(raw.values)
    }
}

impl TabulatedArm {
    /// Values must lie in `[0, 1]`. Monotonicity and concavity are not
    /// enforced here; see [`validate_assumptions`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("tabulated arm needs at least one value"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::config(format!("tabulated arm: value {v} outside [0, 1]")));
        }
        Ok(TabulatedArm { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_pulls(&self) -> usize {
        self.values.len()
    }
}

/// Ground-truth expected-reward curve of one arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArmModel {
    Parametric(ParametricArm),
    Tabulated(TabulatedArm),
}

impl From<ParametricArm> for ArmModel {
    fn from(arm: ParametricArm) -> Self {
        ArmModel::Parametric(arm)
    }
}

impl From<TabulatedArm> for ArmModel {
    fn from(arm: TabulatedArm) -> Self {
        ArmModel::Tabulated(arm)
    }
}

impl ArmModel {
    pub fn parametric(c: f64, b: f64, psi: f64) -> Result<Self> {
        ParametricArm::new(c, b, psi).map(Into::into)
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        TabulatedArm::new(values).map(Into::into)
    }

    /// Largest pull count with a defined expected reward, if bounded.
    pub fn max_pulls(&self) -> Option<usize> {
        match self {
            ArmModel::Parametric(_) => None,
            ArmModel::Tabulated(t) => Some(t.max_pulls()),
        }
    }

    /// Expected reward of the `n`-th pull, `n ≥ 1`.
    pub fn mu(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::range("pull count must be >= 1"));
        }
        match self {
            ArmModel::Parametric(p) => Ok(p.value_at(n as f64)),
            ArmModel::Tabulated(t) => t.values.get(n - 1).copied().ok_or_else(|| {
                Error::range(format!(
                    "pull {n} beyond tabulated horizon {}",
                    t.values.len()
                ))
            }),
        }
    }

    /// `γ(n) = μ(n + 1) − μ(n)`.
    pub fn gamma(&self, n: usize) -> Result<f64> {
        match self {
            ArmModel::Parametric(p) if n >= 1 => Ok(p.increment(n)),
            _ => Ok(self.mu(n + 1)? - self.mu(n)?),
        }
    }
}

/// Source of zero-mean additive reward noise.
pub trait Noise: Send + Sync {
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub struct GaussianNoise {
    normal: Normal<f64>,
}

impl GaussianNoise {
    pub fn new(sigma: f64) -> Result<Self> {
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| Error::config(format!("noise sigma {sigma}: {e}")))?;
        Ok(GaussianNoise { normal })
    }
}

impl Noise for GaussianNoise {
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.normal.sample(rng)
    }
}

/// Arms plus noise level, as stored in setting files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub arms: Vec<ArmModel>,
    pub sigma: f64,
}

impl Setting {
    pub fn new(arms: Vec<ArmModel>, sigma: f64) -> Result<Self> {
        let setting = Setting { arms, sigma };
        setting.check()?;
        Ok(setting)
    }

    pub fn check(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::config("setting needs at least one arm"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let setting: Setting = serde_json::from_str(s)
            .map_err(|e| Error::config(format!("setting: {e}")))?;
        setting.check()?;
        Ok(setting)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let setting: Setting = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        setting.check()?;
        Ok(setting)
    }

    /// Largest budget at which every arm's expected reward is defined.
    pub fn max_budget(&self) -> Option<usize> {
        self.arms.iter().filter_map(ArmModel::max_pulls).min()
    }
}

/// Arms attaining `max_i μ_i(T)`, in increasing index order.
pub fn optimal_arms(arms: &[ArmModel], budget: usize) -> Result<Vec<usize>> {
    let means = arms
        .iter()
        .map(|a| a.mu(budget))
        .collect::<Result<Vec<_>>>()?;
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(means
        .iter()
        .enumerate()
        .filter(|(_, m)| **m == best)
        .map(|(i, _)| i)
        .collect())
}

/// A rested bandit: pulling arm `i` for the `n`-th time yields `μ_i(n) + η`.
pub struct Bandit<'a> {
    arms: &'a [ArmModel],
    noise: Box<dyn Noise + 'a>,
    rng: ChaCha8Rng,
    pulls: Vec<usize>,
    rounds: usize,
}

impl fmt::Debug for Bandit<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bandit")
            .field("arms", &self.arms.len())
            .field("pulls", &self.pulls)
            .field("rounds", &self.rounds)
            .finish()
    }
}

impl<'a> Bandit<'a> {
    /// Gaussian-noise bandit drawing from a ChaCha8 stream seeded with `seed`.
    pub fn new(arms: &'a [ArmModel], sigma: f64, seed: u64) -> Result<Self> {
        Self::with_noise(arms, Box::new(GaussianNoise::new(sigma)?), seed)
    }

    pub fn with_noise(arms: &'a [ArmModel], noise: Box<dyn Noise + 'a>, seed: u64) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::config("bandit needs at least one arm"));
        }
        Ok(Bandit {
            arms,
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pulls: vec![0; arms.len()],
            rounds: 0,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &'a [ArmModel] {
        self.arms
    }

    pub fn pulls(&self) -> &[usize] {
        &self.pulls
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn pull(&mut self, arm: usize) -> Result<f64> {
        let model = self
            .arms
            .get(arm)
            .ok_or_else(|| Error::range(format!("arm index {arm} out of range for {} arms", self.arms.len())))?;
        let n = self.pulls[arm] + 1;
        let mean = model.mu(n)?;
        let eta = self.noise.sample(&mut self.rng);
        self.pulls[arm] = n;
        self.rounds += 1;
        Ok(mean + eta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub monotone: bool,
    pub concave: bool,
}

fn curve_horizon(arm: &ArmModel, horizon: usize) -> usize {
    arm.max_pulls().map_or(horizon, |m| m.min(horizon))
}

/// Checks `γ(n) ≥ 0` and `γ(n + 1) ≤ γ(n)` over the pulls `1..=horizon`
/// (clamped to a tabulated arm's length).
pub fn validate_assumptions(arm: &ArmModel, horizon: usize) -> Result<AssumptionReport> {
    if horizon < 2 {
        return Err(Error::config("assumption check needs horizon >= 2"));
    }
    let h = curve_horizon(arm, horizon);
    let gammas = (1..h).map(|n| arm.gamma(n)).collect::<Result<Vec<_>>>()?;
    let monotone = gammas.iter().all(|g| *g >= -ASSUMPTION_TOL);
    let concave = gammas.windows(2).all(|w| w[1] <= w[0] + ASSUMPTION_TOL);
    Ok(AssumptionReport { monotone, concave })
}

/// Result of the largest-β search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeasibleBeta {
    Bounded(f64),
    /// No increment binds: every `β > 1` satisfies the envelope.
    Unbounded,
}

impl FeasibleBeta {
    pub fn value(self) -> f64 {
        match self {
            FeasibleBeta::Bounded(b) => b,
            FeasibleBeta::Unbounded => f64::INFINITY,
        }
    }
}

/// `sup{β > 1 : γ_i(n) ≤ n^{−β} for all arms and n ∈ [1, horizon]}`, or
/// `None` when the supremum does not exceed 1.
///
/// Increments need `μ(n + 1)`, so tabulated arms contribute `n` up to their
/// length minus one.
pub fn max_feasible_beta(arms: &[ArmModel], horizon: usize) -> Result<Option<FeasibleBeta>> {
    if horizon < 2 {
        return Err(Error::config("beta search needs horizon >= 2"));
    }
    let mut sup = f64::INFINITY;
    for arm in arms {
        let last = match arm.max_pulls() {
            Some(m) => horizon.min(m.saturating_sub(1)),
            None => horizon,
        };
        for n in 1..=last {
            let g = arm.gamma(n)?;
            if n == 1 {
                if g > 1.0 {
                    return Ok(None);
                }
                continue;
            }
            if g > 0.0 {
                sup = sup.min(-g.ln() / (n as f64).ln());
            }
        }
    }
    Ok(if sup.is_infinite() {
        Some(FeasibleBeta::Unbounded)
    } else if sup > 1.0 {
        Some(FeasibleBeta::Bounded(sup))
    } else {
        None
    })
}
