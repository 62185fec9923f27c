//! Sliding-window estimators of an arm's expected reward at the budget `T`.
//!
//! With `n` pulls and window `h = ⌊εn⌋`, the pessimistic estimate averages
//! the last `h` rewards and the optimistic estimate extrapolates the slope
//! between the last two windows linearly up to pull `T`. Both are maintained
//! in constant time per reward through four running sums:
//!
//! ```text
//! a = Σ_{l=n-h+1}^{n}   x(l)          c = Σ_{l=n-h+1}^{n}   l·x(l)
//! b = Σ_{l=n-2h+1}^{n-h} x(l)          d = Σ_{l=n-2h+1}^{n-h} (l+h)·x(l)
//! ```

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::env::ArmModel;
use crate::error::{Error, Result};

/// An estimate that is either a finite number or the "not yet defined"
/// sentinel, which compares greater than every finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Estimate {
    Finite(f64),
    Unbounded,
}

impl Estimate {
    pub fn finite(self) -> Option<f64> {
        match self {
            Estimate::Finite(v) => Some(v),
            Estimate::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Estimate::Unbounded)
    }

    pub fn total_cmp(&self, other: &Estimate) -> Ordering {
        match (self, other) {
            (Estimate::Finite(x), Estimate::Finite(y)) => x.total_cmp(y),
            (Estimate::Finite(_), Estimate::Unbounded) => Ordering::Less,
            (Estimate::Unbounded, Estimate::Finite(_)) => Ordering::Greater,
            (Estimate::Unbounded, Estimate::Unbounded) => Ordering::Equal,
        }
    }

    pub fn plus(self, other: Estimate) -> Estimate {
        match (self, other) {
            (Estimate::Finite(x), Estimate::Finite(y)) => Estimate::Finite(x + y),
            _ => Estimate::Unbounded,
        }
    }
}

impl PartialOrd for Estimate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

/// Index of the largest estimate; ties go to the lowest index.
pub fn argmax<I>(estimates: I) -> Option<usize>
where
    I: IntoIterator<Item = Estimate>,
{
    let mut best: Option<(usize, Estimate)> = None;
    for (i, e) in estimates.into_iter().enumerate() {
        match best {
            Some((_, b)) if e.total_cmp(&b) != Ordering::Greater => {}
            _ => best = Some((i, e)),
        }
    }
    best.map(|(i, _)| i)
}

/// Window fraction `ε ∈ (0, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WindowFraction(f64);

impl WindowFraction {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon < 0.5 {
            Ok(WindowFraction(epsilon))
        } else {
            Err(Error::config(format!("window fraction must lie in (0, 1/2), got {epsilon}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `h(n) = ⌊εn⌋`.
    pub fn window(self, n: usize) -> usize {
        ((self.0 * n as f64).floor() as usize).min(n / 2)
    }
}

impl TryFrom<f64> for WindowFraction {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        WindowFraction::new(v)
    }
}

impl From<WindowFraction> for f64 {
    fn from(w: WindowFraction) -> f64 {
        w.0
    }
}

pub fn window(n: usize, epsilon: f64) -> Result<usize> {
    Ok(WindowFraction::new(epsilon)?.window(n))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulators {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Per-arm reward history with constant-time estimator updates.
#[derive(Clone, Debug)]
pub struct WindowEstimator {
    epsilon: WindowFraction,
    budget: usize,
    rewards: Vec<f64>,
    h: usize,
    acc: Accumulators,
}

impl WindowEstimator {
    pub fn new(epsilon: WindowFraction, budget: usize) -> Self {
        WindowEstimator {
            epsilon,
            budget,
            rewards: Vec::with_capacity(budget.min(1 << 16)),
            h: 0,
            acc: Accumulators::default(),
        }
    }

    pub fn pulls(&self) -> usize {
        self.rewards.len()
    }

    pub fn window(&self) -> usize {
        self.h
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn epsilon(&self) -> WindowFraction {
        self.epsilon
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn accumulators(&self) -> Accumulators {
        self.acc
    }

    pub fn push(&mut self, reward: f64) {
        self.rewards.push(reward);
        let n = self.rewards.len();
        let h_prev = self.h;
        let h = self.epsilon.window(n);
        self.h = h;
        if h == 0 {
            return;
        }
        let nf = n as f64;
        let hf = h as f64;
        let acc = &mut self.acc;
        if h == h_prev {
            let x_new = self.rewards[n - 1];
            let x_mid = self.rewards[n - h - 1];
            let x_old = self.rewards[n - 2 * h - 1];
            acc.a += x_new - x_mid;
            acc.b += x_mid - x_old;
            acc.c += nf * x_new - (nf - hf) * x_mid;
            acc.d += nf * x_mid - (nf - hf) * x_old;
        } else if h == h_prev + 1 {
            // The window grew by one: both windows extend backwards and the
            // weights of the older window shift by one.
            let x_new = self.rewards[n - 1];
            let x_old = self.rewards[n - 2 * h];
            acc.a += x_new;
            acc.b += x_old;
            acc.c += nf * x_new;
            acc.d += acc.b + (nf - hf) * x_old;
        } else {
            self.acc = naive::accumulators(&self.rewards, h);
        }
    }

    /// Trailing-window mean `a / h`; unbounded while `h = 0`.
    pub fn mu_hat(&self) -> Estimate {
        if self.h == 0 {
            return Estimate::Unbounded;
        }
        Estimate::Finite(self.acc.a / self.h as f64)
    }

    /// Window mean plus the linear extrapolation of the last two windows up
    /// to pull `T`; unbounded while `h = 0`.
    pub fn mu_check(&self) -> Estimate {
        if self.h == 0 {
            return Estimate::Unbounded;
        }
        let h = self.h as f64;
        let t = self.budget as f64;
        let Accumulators { a, b, c, d } = self.acc;
        Estimate::Finite((a + (t * (a - b) - (c - d)) / h) / h)
    }

    /// Mean over the last `min(w, n)` rewards, computed directly.
    pub fn trailing_mean(&self, w: usize) -> Estimate {
        let n = self.rewards.len();
        let w = w.min(n);
        if w == 0 {
            return Estimate::Unbounded;
        }
        Estimate::Finite(self.rewards[n - w..].iter().sum::<f64>() / w as f64)
    }

    /// Mean over the whole history.
    pub fn full_mean(&self) -> Estimate {
        self.trailing_mean(self.rewards.len())
    }
}

/// Direct `O(h)` evaluations from the definitions.
pub mod naive {
    use super::{Accumulators, Estimate, WindowFraction};

    pub fn accumulators(rewards: &[f64], h: usize) -> Accumulators {
        let n = rewards.len();
        let x = |l: usize| rewards[l - 1];
        let mut acc = Accumulators::default();
        if h == 0 {
            return acc;
        }
        for l in n - h + 1..=n {
            acc.a += x(l);
            acc.c += l as f64 * x(l);
        }
        for l in n - 2 * h + 1..=n - h {
            acc.b += x(l);
            acc.d += (l + h) as f64 * x(l);
        }
        acc
    }

    pub fn mu_hat(rewards: &[f64], epsilon: WindowFraction) -> Estimate {
        let n = rewards.len();
        let h = epsilon.window(n);
        if h == 0 {
            return Estimate::Unbounded;
        }
        Estimate::Finite(rewards[n - h..].iter().sum::<f64>() / h as f64)
    }

    /// `(1/h)·Σ_{l=n-h+1}^{n} [x(l) + (T − l)·(x(l) − x(l−h))/h]`.
    pub fn mu_check(rewards: &[f64], epsilon: WindowFraction, budget: usize) -> Estimate {
        let n = rewards.len();
        let h = epsilon.window(n);
        if h == 0 {
            return Estimate::Unbounded;
        }
        let x = |l: usize| rewards[l - 1];
        let hf = h as f64;
        let t = budget as f64;
        let sum: f64 = (n - h + 1..=n)
            .map(|l| x(l) + (t - l as f64) * (x(l) - x(l - h)) / hf)
            .sum();
        Estimate::Finite(sum / hf)
    }
}

/// Exploration exponent `a` and noise scale `σ` of the confidence widths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationParams {
    pub a: f64,
    pub sigma: f64,
}

impl ConcentrationParams {
    pub fn new(a: f64, sigma: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::config(format!("exploration parameter must be finite and >= 0, got {a}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::config(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(ConcentrationParams { a, sigma })
    }

    /// `σ·√(a/h)` for a window of width `h`.
    pub fn pessimistic_width(&self, h: usize) -> Estimate {
        if h == 0 {
            return Estimate::Unbounded;
        }
        Estimate::Finite(self.sigma * (self.a / h as f64).sqrt())
    }

    /// `σ·(T − n + h − 1)·√(a/h³)` for `n ≤ T` pulls and window `h`.
    pub fn optimistic_width(&self, n: usize, h: usize, budget: usize) -> Estimate {
        if h == 0 {
            return Estimate::Unbounded;
        }
        let hf = h as f64;
        let lead = budget as f64 - n as f64 + hf - 1.0;
        Estimate::Finite(self.sigma * lead * (self.a / (hf * hf * hf)).sqrt())
    }
}

pub fn beta_hat(params: &ConcentrationParams, n: usize, epsilon: WindowFraction) -> Estimate {
    params.pessimistic_width(epsilon.window(n))
}

pub fn beta_check(
    params: &ConcentrationParams,
    n: usize,
    epsilon: WindowFraction,
    budget: usize,
) -> Result<Estimate> {
    if n > budget {
        return Err(Error::range(format!("pull count {n} exceeds budget {budget}")));
    }
    Ok(params.optimistic_width(n, epsilon.window(n), budget))
}

/// Bias terms of the two estimators; they need the true increments and are
/// for diagnostics only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasTerms {
    pub zeta_hat: f64,
    pub zeta_check: f64,
}

/// `ζ̂ = ½(2T − 2n + h − 1)·γ(n − h + 1)` and
/// `ζ̌ = ½(2T − 2n + h − 1)·γ(n − 2h + 1)`.
pub fn bias_terms(arm: &ArmModel, n: usize, epsilon: WindowFraction, budget: usize) -> Result<BiasTerms> {
    if n == 0 || n > budget {
        return Err(Error::range(format!("bias terms need 1 <= n <= T, got n={n}, T={budget}")));
    }
    let h = epsilon.window(n);
    let coef = 0.5 * (2.0 * budget as f64 - 2.0 * n as f64 + h as f64 - 1.0);
    Ok(BiasTerms {
        zeta_hat: coef * arm.gamma(n - h + 1)?,
        zeta_check: coef * arm.gamma(n - 2 * h + 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eps(v: f64) -> WindowFraction {
        WindowFraction::new(v).unwrap()
    }

    fn filled(rewards: &[f64], e: f64, budget: usize) -> WindowEstimator {
        let mut est = WindowEstimator::new(eps(e), budget);
        for &x in rewards {
            est.push(x);
        }
        est
    }

    #[test]
    fn window_examples() {
        assert_eq!(window(8, 0.25).unwrap(), 2);
        assert_eq!(window(3, 0.25).unwrap(), 0);
        assert_eq!(window(100, 0.49).unwrap(), 49);
        assert!(window(10, 0.5).is_err());
        assert!(window(10, 0.0).is_err());
    }

    #[test]
    fn mu_hat_examples() {
        let est = filled(&[1., 2., 3., 4., 5., 6., 7., 8.], 0.25, 8);
        assert_eq!(est.mu_hat(), Estimate::Finite(7.5));
        let est = filled(&[0.4; 4], 0.25, 8);
        assert_eq!(est.mu_hat(), Estimate::Finite(0.4));
        let est = filled(&[0.4; 2], 0.25, 8);
        assert_eq!(est.mu_hat(), Estimate::Unbounded);
        assert_eq!(est.mu_check(), Estimate::Unbounded);
    }

    #[test]
    fn mu_check_examples() {
        let linear: Vec<f64> = (1..=8).map(|l| l as f64).collect();
        assert_eq!(filled(&linear, 0.25, 20).mu_check(), Estimate::Finite(20.0));
        assert_eq!(filled(&linear, 0.25, 8).mu_check(), Estimate::Finite(8.0));
        let flat = filled(&[0.4; 40], 0.25, 1000);
        assert!((flat.mu_check().finite().unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn first_update_keeps_sentinel() {
        let est = filled(&[0.7], 0.25, 10);
        assert_eq!(est.window(), 0);
        assert_eq!(est.accumulators(), Accumulators::default());
        assert!(est.mu_hat().is_unbounded());
    }

    #[test]
    fn widths() {
        let p = ConcentrationParams::new(2.0, 1.0).unwrap();
        assert_eq!(beta_hat(&p, 32, eps(0.25)), Estimate::Finite(0.5));
        let zero_a = ConcentrationParams::new(0.0, 1.0).unwrap();
        assert_eq!(beta_hat(&zero_a, 32, eps(0.25)), Estimate::Finite(0.0));
        let zero_s = ConcentrationParams::new(2.0, 0.0).unwrap();
        assert_eq!(beta_hat(&zero_s, 32, eps(0.25)), Estimate::Finite(0.0));
        assert!(beta_hat(&p, 3, eps(0.25)).is_unbounded());

        let p = ConcentrationParams::new(10.0, 0.01).unwrap();
        let w = beta_check(&p, 20, eps(0.25), 100).unwrap().finite().unwrap();
        assert!((w - 0.01 * 84.0 * (10.0f64 / 125.0).sqrt()).abs() < 1e-15);
        assert!((w - 0.23759).abs() < 1e-5);
        assert_eq!(beta_check(&zero_a, 20, eps(0.25), 100).unwrap(), Estimate::Finite(0.0));
        // n = T = 4 with h = 1
        assert_eq!(beta_check(&p, 4, eps(0.25), 4).unwrap(), Estimate::Finite(0.0));
        assert!(beta_check(&p, 5, eps(0.25), 4).is_err());
        assert!(ConcentrationParams::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn bias_term_examples() {
        let flat = ArmModel::tabulated(vec![0.5; 200]).unwrap();
        let z = bias_terms(&flat, 20, eps(0.25), 100).unwrap();
        assert_eq!((z.zeta_hat, z.zeta_check), (0.0, 0.0));

        let g = 0.001;
        let linear = ArmModel::tabulated((1..=200).map(|l| l as f64 * g).collect()).unwrap();
        let z = bias_terms(&linear, 20, eps(0.25), 100).unwrap();
        // ½·(200 − 40 + 5 − 1)·g
        assert!((z.zeta_hat - 82.0 * g).abs() < 1e-12);
        assert!((z.zeta_check - 82.0 * g).abs() < 1e-12);

        let z = bias_terms(&linear, 4, eps(0.25), 4).unwrap();
        assert_eq!((z.zeta_hat, z.zeta_check), (0.0, 0.0));
        assert!(matches!(bias_terms(&linear, 0, eps(0.25), 4), Err(Error::Range(_))));
    }

    #[test]
    fn sentinel_ordering_and_argmax() {
        use Estimate::*;
        assert!(Unbounded > Finite(1e300));
        assert_eq!(argmax([Finite(1.0), Unbounded, Unbounded]), Some(1));
        assert_eq!(argmax([Finite(2.0), Finite(1.0), Finite(2.0)]), Some(0));
        assert_eq!(argmax(Vec::<Estimate>::new()), None);
        assert_eq!(Finite(1.0).plus(Unbounded), Unbounded);
    }

    #[test]
    fn history_access() {
        let est = filled(&[0.1, 0.2, 0.3], 0.25, 10);
        assert_eq!(est.rewards()[1], 0.2);
        assert_eq!(est.trailing_mean(2), Estimate::Finite(0.25));
        assert!((est.full_mean().finite().unwrap() - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn window_leaves_room_for_two_blocks(n in 0usize..1_000_000, e in 0.0001f64..0.4999) {
            prop_assert!(2 * window(n, e).unwrap() <= n);
        }

        #[test]
        fn linear_rewards_extrapolate_exactly(
            p in -1.0f64..1.0, q in -0.01f64..0.01, n in 4usize..400, extra in 0usize..400,
            e in prop::sample::select(vec![0.1, 0.25, 0.49]),
        ) {
            let budget = n + extra;
            let rewards: Vec<f64> = (1..=n).map(|l| p + q * l as f64).collect();
            let est = filled(&rewards, e, budget);
            if est.window() >= 1 {
                let expected = p + q * budget as f64;
                let got = est.mu_check().finite().unwrap();
                prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
            }
        }

        #[test]
        fn noiseless_rising_arm_is_sandwiched(
            c in 0.1f64..1.0, b in 0.0f64..50.0, psi in 0.1f64..1.0,
            n in 4usize..500, extra in 0usize..2000,
        ) {
            let arm = ArmModel::parametric(c, b, psi).unwrap();
            let budget = n + extra;
            let rewards: Vec<f64> = (1..=n).map(|l| arm.mu(l).unwrap()).collect();
            let est = filled(&rewards, 0.25, budget);
            let lo = est.mu_hat().finite().unwrap();
            let hi = est.mu_check().finite().unwrap();
            let tol = 1e-12;
            prop_assert!(lo <= arm.mu(n).unwrap() + tol);
            prop_assert!(arm.mu(n).unwrap() <= arm.mu(budget).unwrap() + tol);
            prop_assert!(arm.mu(budget).unwrap() <= hi + tol);
        }
    }
}
