//! Gaps, complexity indices, exploration thresholds and error bounds.

use serde::Serialize;

use crate::env::ArmModel;
use crate::error::{Error, Result};
use crate::estimator::WindowFraction;

/// `loḡ(K) = 1/2 + Σ_{i=2}^{K} 1/i`.
pub fn log_bar(k: usize) -> f64 {
    0.5 + (2..=k).map(|i| 1.0 / i as f64).sum::<f64>()
}

/// Suboptimality gaps `Δ_i(T) = μ_{i*}(T) − μ_i(T)` at a fixed budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapProfile {
    pub budget: usize,
    pub optimal: usize,
    /// `(arm, Δ_i(T))` for every `i ≠ i*`, in arm order.
    pub gaps: Vec<(usize, f64)>,
    /// `Δ_(2) ≤ … ≤ Δ_(K)`; entry `k` is the gap of rank `k + 2`.
    pub sorted_gaps: Vec<f64>,
}

impl GapProfile {
    pub fn new(arms: &[ArmModel], budget: usize) -> Result<Self> {
        let means = arms
            .iter()
            .map(|a| a.mu(budget))
            .collect::<Result<Vec<_>>>()?;
        Self::from_means(&means, budget)
    }

    pub fn from_means(means: &[f64], budget: usize) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::config("gap profile needs at least one arm"));
        }
        let optimal = crate::estimator::argmax(means.iter().map(|&m| crate::estimator::Estimate::Finite(m)))
            .expect("non-empty");
        let best = means[optimal];
        let gaps: Vec<(usize, f64)> = means
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != optimal)
            .map(|(i, m)| (i, best - m))
            .collect();
        if let Some((i, _)) = gaps.iter().find(|(_, g)| *g <= 0.0) {
            return Err(Error::Degenerate(format!(
                "arms {optimal} and {i} tie for the best mean at T={budget}"
            )));
        }
        let mut sorted_gaps: Vec<f64> = gaps.iter().map(|(_, g)| *g).collect();
        sorted_gaps.sort_by(f64::total_cmp);
        Ok(GapProfile { budget, optimal, gaps, sorted_gaps })
    }

    pub fn num_arms(&self) -> usize {
        self.gaps.len() + 1
    }

    /// `H_1^η(T) = Σ_{i≠i*} Δ_i^{−η}`.
    pub fn h1(&self, eta: f64) -> f64 {
        self.gaps.iter().map(|(_, g)| g.powf(-eta)).sum()
    }

    /// `H_2(T) = max_{i ∈ {2..K}} i·Δ_(i)^{−2}`.
    pub fn h2(&self) -> f64 {
        self.ranked().map(|(i, g)| i * g.powi(-2)).fold(0.0, f64::max)
    }

    /// `Ψ_β(T) = max_{i ∈ {2..K}} i^{β/(β−1)}·Δ_(i)^{−1/(β−1)}`.
    pub fn psi_beta(&self, beta: f64) -> f64 {
        self.ranked()
            .map(|(i, g)| i.powf(beta / (beta - 1.0)) * g.powf(-1.0 / (beta - 1.0)))
            .fold(0.0, f64::max)
    }

    fn ranked(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sorted_gaps
            .iter()
            .enumerate()
            .map(|(k, &g)| ((k + 2) as f64, g))
    }
}

/// Smallest budget in `1..=max_budget` from which the optimal arm (lowest
/// index on ties) no longer changes.
pub fn last_optimal_change(arms: &[ArmModel], max_budget: usize) -> Result<usize> {
    let mut last = 1;
    let mut current = None;
    for t in 1..=max_budget {
        let best = crate::env::optimal_arms(arms, t)?[0];
        if current != Some(best) {
            current = Some(best);
            last = t;
        }
    }
    Ok(last)
}

/// Increment sequence `n ↦ γ(n)` used by the implicit thresholds.
pub trait Increments {
    fn increment(&self, n: usize) -> Result<f64>;

    /// Largest `n` for which the increment is defined, if bounded.
    fn max_index(&self) -> Option<usize> {
        None
    }
}

impl Increments for ArmModel {
    fn increment(&self, n: usize) -> Result<f64> {
        self.gamma(n)
    }

    fn max_index(&self) -> Option<usize> {
        self.max_pulls().map(|m| m.saturating_sub(1))
    }
}

/// The extremal increment sequence `γ(n) = n^{−β}`.
#[derive(Clone, Copy, Debug)]
pub struct PowerEnvelope {
    pub beta: f64,
}

impl Increments for PowerEnvelope {
    fn increment(&self, n: usize) -> Result<f64> {
        Ok((n as f64).powf(-self.beta))
    }
}

/// Caps and tolerance of the implicit searches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchLimits {
    pub y_cap: usize,
    pub a_cap: f64,
    pub rel_tol: f64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { y_cap: 100_000_000, a_cap: 1e12, rel_tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PullBound {
    Finite(usize),
    /// The defining inequality still holds at the search cap.
    Unbounded,
}

/// Inputs of the per-arm pull threshold `y_i(a)`.
#[derive(Clone, Copy, Debug)]
pub struct PullThreshold {
    pub budget: usize,
    pub epsilon: WindowFraction,
    pub sigma: f64,
    pub gap: f64,
}

impl PullThreshold {
    /// Smallest `y` with `⌊εy⌋ ≥ 1` and `⌊(1−2ε)y⌋ ≥ 1`.
    pub fn y_min(&self) -> usize {
        let e = self.epsilon.get();
        let mut y = (1.0 / e).ceil().max((1.0 / (1.0 - 2.0 * e)).ceil()) as usize;
        while self.epsilon.window(y) < 1 || self.growth_index(y) < 1 {
            y += 1;
        }
        y
    }

    fn growth_index(&self, y: usize) -> usize {
        ((1.0 - 2.0 * self.epsilon.get()) * y as f64).floor() as usize
    }

    /// `T·γ(⌊(1−2ε)y⌋) + 2Tσ·√(a/⌊εy⌋³) ≥ Δ`.
    pub fn holds(&self, curve: &dyn Increments, a: f64, y: usize) -> Result<bool> {
        let t = self.budget as f64;
        let q = self.epsilon.window(y) as f64;
        let growth = t * curve.increment(self.growth_index(y))?;
        let noise = 2.0 * t * self.sigma * (a / (q * q * q)).sqrt();
        Ok(growth + noise >= self.gap)
    }

    fn y_cap(&self, curve: &dyn Increments, limits: &SearchLimits) -> usize {
        let mut cap = limits.y_cap;
        if let Some(m) = curve.max_index() {
            let e = 1.0 - 2.0 * self.epsilon.get();
            cap = cap.min(((m as f64 + 1.0) / e).floor() as usize);
            while cap > 0 && self.growth_index(cap) > m {
                cap -= 1;
            }
        }
        cap
    }

    /// Largest `y ∈ [y_min, cap]` satisfying [`holds`](Self::holds), found by
    /// bisection; `y_min − 1` if none does.
    pub fn solve(&self, curve: &dyn Increments, a: f64, limits: &SearchLimits) -> Result<PullBound> {
        let lo_bound = self.y_min();
        let cap = self.y_cap(curve, limits);
        if cap < lo_bound || !self.holds(curve, a, lo_bound)? {
            return Ok(PullBound::Finite(lo_bound - 1));
        }
        if self.holds(curve, a, cap)? {
            return Ok(PullBound::Unbounded);
        }
        let (mut lo, mut hi) = (lo_bound, cap);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.holds(curve, a, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(PullBound::Finite(lo))
    }
}

/// `y_i(a)` with the default caps.
pub fn y_i(
    a: f64,
    curve: &dyn Increments,
    gap: f64,
    budget: usize,
    epsilon: WindowFraction,
    sigma: f64,
) -> Result<PullBound> {
    PullThreshold { budget, epsilon, sigma, gap }.solve(curve, a, &SearchLimits::default())
}

/// `T − Σ_{i≠i*} y_i(a) ≥ 1`.
fn budget_leaves_room(
    curves: &[&dyn Increments],
    gaps: &GapProfile,
    epsilon: WindowFraction,
    sigma: f64,
    a: f64,
    limits: &SearchLimits,
) -> Result<bool> {
    let mut total = 0usize;
    for &(arm, gap) in &gaps.gaps {
        let th = PullThreshold { budget: gaps.budget, epsilon, sigma, gap };
        match th.solve(curves[arm], a, limits)? {
            PullBound::Finite(y) => total += y,
            PullBound::Unbounded => return Ok(false),
        }
    }
    Ok(total < gaps.budget)
}

/// Largest `a ∈ [0, a_cap]` keeping `T − Σ_{i≠i*} y_i(a) ≥ 1`, using the
/// true increments. Returns the cap itself when the condition never fails
/// (e.g. `σ = 0`).
pub fn a_star_implicit_with(
    curves: &[&dyn Increments],
    gaps: &GapProfile,
    epsilon: WindowFraction,
    sigma: f64,
    limits: &SearchLimits,
) -> Result<Option<f64>> {
    if curves.len() != gaps.num_arms() {
        return Err(Error::config("one increment curve per arm is required"));
    }
    let ok = |a| budget_leaves_room(curves, gaps, epsilon, sigma, a, limits);
    if !ok(0.0)? {
        return Ok(None);
    }
    if ok(limits.a_cap)? {
        return Ok(Some(limits.a_cap));
    }
    let (mut lo, mut hi) = (0.0, limits.a_cap);
    while hi - lo > limits.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

pub fn a_star_implicit(
    arms: &[ArmModel],
    budget: usize,
    epsilon: WindowFraction,
    sigma: f64,
) -> Result<Option<f64>> {
    let gaps = GapProfile::new(arms, budget)?;
    let curves: Vec<&dyn Increments> = arms.iter().map(|a| a as &dyn Increments).collect();
    a_star_implicit_with(&curves, &gaps, epsilon, sigma, &SearchLimits::default())
}

/// The bracketed term of the explicit threshold, before squaring:
/// `ratio − (1−2ε)^{−β}`, where `ratio` uses `H_1^{1/β}` for `β < 3/2` and
/// `H_1^{2/3}` otherwise.
pub fn a_star_margin(gaps: &GapProfile, beta: f64, epsilon: WindowFraction) -> Result<f64> {
    if !(beta > 1.0) {
        return Err(Error::config(format!("beta must exceed 1, got {beta}")));
    }
    let k = gaps.num_arms() as f64;
    let slack = gaps.budget as f64 - (k - 1.0);
    let ratio = if beta < 1.5 {
        slack.powf(beta - 1.0) / gaps.h1(1.0 / beta).powf(beta)
    } else {
        slack.sqrt() / gaps.h1(2.0 / 3.0).powf(1.5)
    };
    Ok(ratio - (1.0 - 2.0 * epsilon.get()).powf(-beta))
}

/// `(ε³/4σ²)·margin²` without checking the sign of the margin.
pub fn a_star_formula(gaps: &GapProfile, beta: f64, epsilon: WindowFraction, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::config(
            "explicit exploration threshold is undefined for sigma = 0; use the implicit threshold",
        ));
    }
    let m = a_star_margin(gaps, beta, epsilon)?;
    Ok(epsilon.get().powi(3) / (4.0 * sigma * sigma) * m * m)
}

/// Explicit exploration threshold under the `n^{−β}` envelope, or `None`
/// when the margin is negative.
pub fn a_star_closed(gaps: &GapProfile, beta: f64, epsilon: WindowFraction, sigma: f64) -> Result<Option<f64>> {
    let a = a_star_formula(gaps, beta, epsilon, sigma)?;
    Ok((a_star_margin(gaps, beta, epsilon)? >= 0.0).then_some(a))
}

/// `min(1, 2TK·e^{−a/10})`.
pub fn rucbe_error_bound(a: f64, budget: usize, k: usize) -> f64 {
    (2.0 * budget as f64 * k as f64 * (-a / 10.0).exp()).min(1.0)
}

/// `C(β) = 2^{−(1+β)/(1−β)}·loḡ(K)^{−β/(1−β)}`.
pub fn c_beta(beta: f64, k: usize) -> f64 {
    2f64.powf(-(1.0 + beta) / (1.0 - beta)) * log_bar(k).powf(-beta / (1.0 - beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BudgetCheck {
    pub ok: bool,
    /// `C(β)·Ψ_β(T)`.
    pub required: f64,
    /// `T − C(β)·Ψ_β(T)`.
    pub margin: f64,
}

pub fn rsr_budget_ok(gaps: &GapProfile, beta: f64) -> Result<BudgetCheck> {
    if !(beta > 1.0) {
        return Err(Error::config(format!("beta must exceed 1, got {beta}")));
    }
    let required = c_beta(beta, gaps.num_arms()) * gaps.psi_beta(beta);
    let margin = gaps.budget as f64 - required;
    Ok(BudgetCheck { ok: margin >= 0.0, required, margin })
}

/// `min(1, K(K−1)/2·exp(−(ε/8σ²)·(T−K)/(loḡ(K)·H_2)))`.
pub fn rsr_error_bound(gaps: &GapProfile, epsilon: WindowFraction, sigma: f64) -> Result<f64> {
    let k = gaps.num_arms();
    if gaps.budget <= k {
        return Err(Error::config(format!("R-SR bound needs T > K, got T={}, K={k}", gaps.budget)));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let rate = epsilon.get() / (8.0 * sigma * sigma) * (gaps.budget as f64 - kf) / (log_bar(k) * gaps.h2());
    Ok((kf * (kf - 1.0) / 2.0 * (-rate).exp()).min(1.0))
}

/// Budget `⌈1 + ((β−1)/2 · min Δ(∞))^{1/(1−β)}⌉` past which every gap is at
/// least half its asymptotic value.
pub fn min_budget_gap_stability(beta: f64, delta_inf_min: f64) -> Result<f64> {
    if !(beta > 1.0) {
        return Err(Error::config(format!("beta must exceed 1, got {beta}")));
    }
    if !(delta_inf_min > 0.0) {
        return Err(Error::config("asymptotic gap must be positive"));
    }
    Ok((1.0 + ((beta - 1.0) / 2.0 * delta_inf_min).powf(1.0 / (1.0 - beta))).ceil())
}
