//! Random walks in random environment on ℤ.
//!
//! An [`Environment`] stores the right-step probabilities ω_x on a node range
//! as log-odds ℓ_x = ln(ω_x / (1 − ω_x)); the conductances
//!
//! * c_{0,1} = 1,
//! * c_{z,z+1} = Π_{x=1}^{z} ω_x/(1 − ω_x) for z ≥ 1,
//! * c_{z−1,z} = Π_{x=z}^{0} (1 − ω_x)/ω_x for z ≤ 0,
//!
//! are kept as log-conductances so that extreme environments neither
//! overflow nor round ω to 0 or 1.

use rand::{Rng, RngExt};

use crate::dynamics::{RecordMode, StepRecord, Trajectory, TrajectoryRecorder};
use crate::error::{Error, Result};
use crate::graph::{EdgeKey, NodeId};
use crate::quad;
use crate::special::{ln_gamma, logistic, BetaParams};

/// Node-dependent Beta laws of ω_x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvironmentLaw {
    /// Mixing law of the λ⁺-biased walk with unit initial weights.
    AdditiveBias { lambda: f64 },
    /// Mixing law of the walk with initial weight λ^z on {z, z+1}.
    TransientInitial { lambda: f64 },
    Iid(BetaParams),
}

impl EnvironmentLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EnvironmentLaw::AdditiveBias { lambda } if !(lambda.is_finite() && lambda >= 0.0) => {
                Err(Error::Domain(format!("additive bias needs λ ≥ 0, got {lambda}")))
            }
            EnvironmentLaw::TransientInitial { lambda } if !(lambda.is_finite() && lambda > 0.0) => {
                Err(Error::Domain(format!("transient environment needs λ > 0, got {lambda}")))
            }
            _ => Ok(()),
        }
    }

    /// Law of ω_x.
    pub fn params_at(&self, x: NodeId) -> Result<BetaParams> {
        match *self {
            EnvironmentLaw::AdditiveBias { lambda } => {
                if x > 0 {
                    BetaParams::new((1.0 + lambda) / 2.0, 1.0)
                } else if x == 0 {
                    BetaParams::new((1.0 + lambda) / 2.0, 0.5)
                } else {
                    BetaParams::new((2.0 + lambda) / 2.0, 0.5)
                }
            }
            EnvironmentLaw::TransientInitial { lambda } => {
                let pow = |k: NodeId| lambda.powf(k as f64);
                let (a, b) = if x > 0 {
                    (pow(x) / 2.0, (1.0 + pow(x - 1)) / 2.0)
                } else if x == 0 {
                    (0.5, 1.0 / (2.0 * lambda))
                } else {
                    ((1.0 + pow(x)) / 2.0, pow(x - 1) / 2.0)
                };
                if !(a.is_finite() && b.is_finite()) || a < f64::MIN_POSITIVE || b < f64::MIN_POSITIVE {
                    return Err(Error::Range(format!(
                        "Beta parameters at x = {x} are not representable (λ = {lambda})"
                    )));
                }
                BetaParams::new(a, b)
            }
            EnvironmentLaw::Iid(p) => Ok(p),
        }
    }
}

/// A fixed environment on the nodes `z_min..=z_max` (which include 0 and 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    z_min: NodeId,
    log_odds: Vec<f64>,
    /// ln c of the edges {z_min − 1, z_min} … {z_max, z_max + 1}.
    log_cond: Vec<f64>,
    law: Option<EnvironmentLaw>,
}

impl Environment {
    pub fn from_log_odds(z_min: NodeId, log_odds: Vec<f64>) -> Result<Self> {
        let z_max = z_min + log_odds.len() as NodeId - 1;
        if z_min > 0 || z_max < 1 {
            return Err(Error::InvalidParameter(format!("environment range {z_min}..={z_max} must contain 0 and 1")));
        }
        if log_odds.iter().any(|l| l.is_nan()) {
            return Err(Error::InvalidParameter("log-odds must not be NaN".into()));
        }
        let mut env = Self { z_min, log_odds, log_cond: Vec::new(), law: None };
        env.rebuild_conductances();
        Ok(env)
    }

    pub fn from_omega(z_min: NodeId, omega: &[f64]) -> Result<Self> {
        if let Some(w) = omega.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
            return Err(Error::InvalidParameter(format!("ω must lie in (0, 1), got {w}")));
        }
        Self::from_log_odds(z_min, omega.iter().map(|w| (w / (1.0 - w)).ln()).collect())
    }

    /// ω_x ≡ `omega` on `z_min..=z_max`.
    pub fn constant(z_min: NodeId, z_max: NodeId, omega: f64) -> Result<Self> {
        let n = (z_max - z_min + 1).max(0) as usize;
        Self::from_omega(z_min, &vec![omega; n])
    }

    fn rebuild_conductances(&mut self) {
        let z_max = self.z_max();
        // Edge {j, j+1} for j in z_min−1..=z_max.
        let mut lc = vec![0.0; (z_max - self.z_min + 2) as usize];
        let idx = |j: NodeId| (j - (self.z_min - 1)) as usize;
        for j in 1..=z_max {
            lc[idx(j)] = lc[idx(j - 1)] + self.ell(j);
        }
        for j in (self.z_min - 1..0).rev() {
            // c_{j,j+1} = c_{j+1,j+2} · (1 − ω_{j+1})/ω_{j+1}.
            lc[idx(j)] = lc[idx(j + 1)] - self.ell(j + 1);
        }
        self.log_cond = lc;
    }

    fn ell(&self, x: NodeId) -> f64 {
        self.log_odds[(x - self.z_min) as usize]
    }

    pub fn z_min(&self) -> NodeId {
        self.z_min
    }

    pub fn z_max(&self) -> NodeId {
        self.z_min + self.log_odds.len() as NodeId - 1
    }

    pub fn contains(&self, x: NodeId) -> bool {
        (self.z_min..=self.z_max()).contains(&x)
    }

    pub fn law(&self) -> Option<EnvironmentLaw> {
        self.law
    }

    /// c_{0,1} = 1 by construction.
    pub fn is_normalized(&self) -> bool {
        self.log_conductance(EdgeKey::new(0, 1)) == Some(0.0)
    }

    pub fn log_odds(&self, x: NodeId) -> Option<f64> {
        self.contains(x).then(|| self.ell(x))
    }

    /// ω_x (may round to 0 or 1 for extreme log-odds; use [`Self::log_odds`]).
    pub fn omega(&self, x: NodeId) -> Option<f64> {
        self.log_odds(x).map(logistic)
    }

    pub fn log_conductance(&self, e: EdgeKey) -> Option<f64> {
        if e.hi != e.lo + 1 || e.lo < self.z_min - 1 || e.lo > self.z_max() {
            return None;
        }
        Some(self.log_cond[(e.lo - (self.z_min - 1)) as usize])
    }

    pub fn conductance(&self, e: EdgeKey) -> Option<f64> {
        self.log_conductance(e).map(f64::exp)
    }

    pub fn resistance(&self, e: EdgeKey) -> Option<f64> {
        self.log_conductance(e).map(|l| (-l).exp())
    }

    /// P(x → x+1) from the conductances: c_{x,x+1}/(c_{x−1,x} + c_{x,x+1}).
    pub fn right_prob_from_conductances(&self, x: NodeId) -> Option<f64> {
        let r = self.log_conductance(EdgeKey::new(x, x + 1))?;
        let l = self.log_conductance(EdgeKey::new(x - 1, x))?;
        Some(logistic(r - l))
    }

    /// Sample the nodes outside the range up to `x` from the attached law.
    fn extend_to<R: Rng + ?Sized>(&mut self, x: NodeId, rng: &mut R) -> Result<()> {
        let law = self.law.ok_or_else(|| Error::Range(format!("node {x} outside the environment")))?;
        if x < self.z_min {
            let mut front = (x..self.z_min).map(|y| Ok(law.params_at(y)?.sample_log_odds(rng))).collect::<Result<Vec<_>>>()?;
            front.extend_from_slice(&self.log_odds);
            self.log_odds = front;
            self.z_min = x;
        } else if x > self.z_max() {
            for y in self.z_max() + 1..=x {
                self.log_odds.push(law.params_at(y)?.sample_log_odds(rng));
            }
        }
        self.rebuild_conductances();
        Ok(())
    }
}

/// Independent ω_x ~ law(x) on `z_min..=z_max`; the law stays attached so
/// walks can extend the range.
pub fn sample_environment<R: Rng + ?Sized>(
    law: EnvironmentLaw,
    z_min: NodeId,
    z_max: NodeId,
    rng: &mut R,
) -> Result<Environment> {
    law.validate()?;
    let log_odds = (z_min..=z_max).map(|x| Ok(law.params_at(x)?.sample_log_odds(rng))).collect::<Result<Vec<_>>>()?;
    let mut env = Environment::from_log_odds(z_min, log_odds)?;
    env.law = Some(law);
    Ok(env)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioSide {
    /// (1 − A)/A
    FailureOverSuccess,
    /// A/(1 − A)
    SuccessOverFailure,
}

/// E[((1 − A)/A)^t] = Γ(α − t)Γ(β + t)/(Γ(α)Γ(β)) for −β < t < α, +∞
/// otherwise; the other side swaps α and β.
pub fn beta_ratio_moment(params: BetaParams, t: f64, side: RatioSide) -> f64 {
    let (a, b) = match side {
        RatioSide::FailureOverSuccess => (params.alpha, params.beta),
        RatioSide::SuccessOverFailure => (params.beta, params.alpha),
    };
    if !(-b < t && t < a) {
        return f64::INFINITY;
    }
    (ln_gamma(a - t) + ln_gamma(b + t) - ln_gamma(a) - ln_gamma(b)).exp()
}

/// E[ln((1 − ω)/ω)] with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub value: f64,
    pub abs_error: f64,
}

/// Drift E[ln((1 − ω)/ω)] for ω ~ Beta((1+λ)/2, 1), the law at the nodes
/// x > 0 of the λ⁺ walk. Negative drift means transience to the right.
///
/// The integral α∫₀¹ ln((1−x)/x) x^{α−1} dx is split at ½; the substitutions
/// x = e^{−u} and 1 − x = e^{−u} turn both halves into exponentially
/// decaying integrals over [ln 2, ∞), truncated where the tail is below 1e-17.
pub fn solomon_drift(lambda: f64) -> Result<Drift> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Domain(format!("λ must be finite and ≥ 0, got {lambda}")));
    }
    let alpha = (1.0 + lambda) / 2.0;
    let ln2 = std::f64::consts::LN_2;
    let log1mexp = |u: f64| (-(-u).exp()).ln_1p();
    // Lower half: x = e^{-u}.
    let lower = move |u: f64| alpha * (u + log1mexp(u)) * (-alpha * u).exp();
    // Upper half: 1 − x = e^{-u}.
    let upper = move |u: f64| {
        let l = log1mexp(u);
        -alpha * (u + l) * ((alpha - 1.0) * l - u).exp()
    };
    let cut = |rate: f64, scale: f64| {
        let mut u = 1.0;
        while (u + 1.0 / rate) * scale * (-rate * u).exp() > 1e-17 {
            u *= 1.5;
        }
        u
    };
    let u1 = cut(alpha, alpha);
    let u2 = cut(1.0, alpha * 2f64.powf((1.0 - alpha).max(0.0)));
    let a = quad::integrate(&lower, ln2, u1, 1e-13, 2000)?;
    let b = quad::integrate(&upper, ln2, u2, 1e-13, 2000)?;
    Ok(Drift { value: a.value + b.value, abs_error: a.abs_error + b.abs_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    Recurrent,
    TransientRight,
}

/// The λ⁺ walk on ℤ is recurrent iff λ ≤ 1.
pub fn classify_additive_bias(lambda: f64) -> Result<Recurrence> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("λ must be ≥ 0, got {lambda}")));
    }
    Ok(if lambda <= 1.0 { Recurrence::Recurrent } else { Recurrence::TransientRight })
}

/// Asymptotic speed of the λ⁺ walk: 0 for λ ≤ 3, (λ−3)/(λ+1) above.
pub fn speed_additive_bias(lambda: f64) -> f64 {
    if lambda <= 3.0 {
        0.0
    } else if lambda.is_infinite() {
        1.0
    } else {
        (lambda - 3.0) / (lambda + 1.0)
    }
}

/// Thresholds for deciding convergence or divergence of a positive series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRules {
    /// Partial sums above this are divergent.
    pub divergence_sum: f64,
    /// This many consecutive terms above `persistent_term` mean divergence.
    pub persistent_run: usize,
    pub persistent_term: f64,
    /// Ratios averaged (geometrically) to extrapolate the tail.
    pub ratio_window: usize,
    pub min_terms: usize,
    /// Absolute tolerance on the extrapolated tail.
    pub tail_tolerance: f64,
}

impl Default for SeriesRules {
    fn default() -> Self {
        Self {
            divergence_sum: 1e12,
            persistent_run: 1000,
            persistent_term: 1e-3,
            ratio_window: 100,
            min_terms: 20,
            tail_tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesStatus {
    Converged { sum: f64, tail_bound: f64, terms: usize },
    Diverged { terms: usize },
    Inconclusive { partial_sum: f64, terms: usize },
}

/// Classify Σ exp(log_terms[i]).
pub fn classify_series(log_terms: impl IntoIterator<Item = f64>, rules: &SeriesRules) -> SeriesStatus {
    let mut sum = 0.0;
    let mut run = 0usize;
    let mut logs: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
    let mut n = 0;
    for lt in log_terms {
        n += 1;
        sum += lt.exp();
        if sum > rules.divergence_sum || sum.is_infinite() {
            return SeriesStatus::Diverged { terms: n };
        }
        run = if lt.exp() > rules.persistent_term { run + 1 } else { 0 };
        if run >= rules.persistent_run {
            return SeriesStatus::Diverged { terms: n };
        }
        logs.push_back(lt);
        if logs.len() > rules.ratio_window + 1 {
            logs.pop_front();
        }
        if n >= rules.min_terms {
            let k = (logs.len() - 1) as f64;
            let log_ratio = (logs[logs.len() - 1] - logs[0]) / k;
            if log_ratio < 0.0 {
                let r = log_ratio.exp();
                let tail = (lt + log_ratio).exp() / (1.0 - r);
                if tail <= rules.tail_tolerance {
                    return SeriesStatus::Converged { sum, tail_bound: tail, terms: n };
                }
            }
        }
    }
    SeriesStatus::Inconclusive { partial_sum: sum, terms: n }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResistanceOutcome {
    /// Both series converged.
    Value { r_eff: f64, tail_bound: f64 },
    /// The left series diverged: R_eff is the right-hand resistance.
    DivergedLeft { r_eff: f64, tail_bound: f64 },
    /// The right series diverged: R_eff is the left-hand resistance.
    DivergedRight { r_eff: f64, tail_bound: f64 },
    /// Both diverged: R_eff = ∞, the walk is recurrent.
    DivergedBoth,
    Inconclusive { right: SeriesStatus, left: SeriesStatus },
}

impl ResistanceOutcome {
    pub fn r_eff(&self) -> Option<f64> {
        match *self {
            ResistanceOutcome::Value { r_eff, .. }
            | ResistanceOutcome::DivergedLeft { r_eff, .. }
            | ResistanceOutcome::DivergedRight { r_eff, .. } => Some(r_eff),
            ResistanceOutcome::DivergedBoth => Some(f64::INFINITY),
            ResistanceOutcome::Inconclusive { .. } => None,
        }
    }

    pub fn is_recurrent(&self) -> Option<bool> {
        match self {
            ResistanceOutcome::DivergedBoth => Some(true),
            ResistanceOutcome::Inconclusive { .. } => None,
            _ => Some(false),
        }
    }
}

/// Effective resistance between 0 and ±∞,
/// R = ((1 + Σ_{z≥1} Π_{x=1}^{z} (1−ω_x)/ω_x)^{−1} + (Σ_{z≤0} Π_{x=z}^{0} ω_x/(1−ω_x))^{−1})^{−1},
/// with both series truncated at `max_abs` (and at the environment range).
pub fn effective_resistance(env: &Environment, max_abs: u64, rules: &SeriesRules) -> ResistanceOutcome {
    let hi = env.z_max().min(max_abs as NodeId);
    let lo = env.z_min().max(-(max_abs as NodeId));
    let mut acc = 0.0;
    let right_terms = (1..=hi).map(|x| {
        acc -= env.ell(x);
        acc
    });
    let right = classify_series(right_terms, rules);
    let mut acc = 0.0;
    let left_terms = (lo..=0).rev().map(|x| {
        acc += env.ell(x);
        acc
    });
    let left = classify_series(left_terms, rules);
    match (right, left) {
        (SeriesStatus::Converged { sum: r, tail_bound: tr, .. }, SeriesStatus::Converged { sum: l, tail_bound: tl, .. }) => {
            ResistanceOutcome::Value { r_eff: 1.0 / (1.0 / (1.0 + r) + 1.0 / l), tail_bound: tr + tl }
        }
        (SeriesStatus::Converged { sum, tail_bound, .. }, SeriesStatus::Diverged { .. }) => {
            ResistanceOutcome::DivergedLeft { r_eff: 1.0 + sum, tail_bound }
        }
        (SeriesStatus::Diverged { .. }, SeriesStatus::Converged { sum, tail_bound, .. }) => {
            ResistanceOutcome::DivergedRight { r_eff: sum, tail_bound }
        }
        (SeriesStatus::Diverged { .. }, SeriesStatus::Diverged { .. }) => ResistanceOutcome::DivergedBoth,
        (right, left) => ResistanceOutcome::Inconclusive { right, left },
    }
}

/// Markov chain in the fixed environment: from x go right with probability ω_x.
/// Leaving the sampled range extends it from the attached law, or fails.
pub fn walk_in_environment<R: Rng + ?Sized>(
    env: &mut Environment,
    start: NodeId,
    n_steps: u64,
    rng: &mut R,
    mode: RecordMode,
) -> Result<Trajectory> {
    if !env.contains(start) {
        env.extend_to(start, rng)?;
    }
    let mut rec = TrajectoryRecorder::new(&[start], n_steps, mode);
    let mut x = start;
    for n in 1..=n_steps {
        // u < ω  ⇔  logit(u) < ℓ, avoiding ω rounding to 1.
        let u: f64 = rng.random();
        let to = if u < logistic(env.ell(x)) { x + 1 } else { x - 1 };
        if !env.contains(to) {
            env.extend_to(to, rng)?;
        }
        rec.push(StepRecord { time: n, walker: 0, from: x, to });
        x = to;
    }
    Ok(rec.finish())
}

/// Solution of the tree phase-transition equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalWeight {
    pub delta0: f64,
    pub a_crit: f64,
    pub residual: f64,
}

/// Search bracket for Δ.
pub const CRITICAL_BRACKET: (f64, f64) = (1e-6, 1e3);

/// ln of Γ((2+Δ)/(4Δ))² / (Γ(1/(2Δ)) Γ((1+Δ)/(2Δ))).
///
/// With s = 1/(2Δ) the arguments are s + ¼, s and s + ½. For large s the
/// Stirling series of ln Γ(s + a) − ln Γ(s) is used so that the leading
/// terms cancel analytically.
pub fn critical_lhs_ln(delta: f64) -> f64 {
    let s = 1.0 / (2.0 * delta);
    if s < 12.0 {
        return 2.0 * ln_gamma(s + 0.25) - ln_gamma(s) - ln_gamma(s + 0.5);
    }
    // ln Γ(s+a) − ln Γ(s) = a ln s + Σ_k (−1)^{k+1} (B_{k+1}(a) − B_{k+1}) / (k(k+1) s^k).
    let mut total = 0.0;
    let mut sp = 1.0;
    for k in 1..=12usize {
        sp *= s;
        let c = 2.0 * (bernoulli_poly(k + 1, 0.25) - BERNOULLI[k + 1]) - (bernoulli_poly(k + 1, 0.5) - BERNOULLI[k + 1]);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * c / ((k * (k + 1)) as f64 * sp);
    }
    total
}

const BERNOULLI: [f64; 14] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
];

fn bernoulli_poly(n: usize, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut total = 0.0;
    for j in 0..=n {
        total += binom * BERNOULLI[j] * x.powi((n - j) as i32);
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    total
}

/// Solve Γ((2+Δ)/(4Δ))² / (Γ(1/(2Δ)) Γ((1+Δ)/(2Δ))) = 1/br by bisection on
/// [`CRITICAL_BRACKET`]; a_crit = 1/Δ₀.
pub fn tree_critical_weight(branching: f64) -> Result<CriticalWeight> {
    if !(branching.is_finite() && branching > 1.0 + 1e-6) {
        return Err(Error::Domain(format!("branching number must exceed 1 + 1e-6, got {branching}")));
    }
    let (lo, hi) = CRITICAL_BRACKET;
    // The left side must decrease on the bracket for the root to be unique.
    let grid = 400;
    let mut prev = f64::INFINITY;
    for i in 0..=grid {
        let d = lo * (hi / lo).powf(i as f64 / grid as f64);
        let v = critical_lhs_ln(d);
        if !(v < prev) {
            return Err(Error::Domain(format!("left side not decreasing near Δ = {d}")));
        }
        prev = v;
    }
    let target = -branching.ln();
    let g = |d: f64| critical_lhs_ln(d) - target;
    let (mut a, mut b) = (lo, hi);
    if g(a) < 0.0 || g(b) > 0.0 {
        return Err(Error::Domain(format!("no root in [{lo}, {hi}] for br = {branching}")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let delta0 = 0.5 * (a + b);
    let residual = (critical_lhs_ln(delta0).exp() - 1.0 / branching).abs();
    Ok(CriticalWeight { delta0, a_crit: 1.0 / delta0, residual })
}
