//! `rwalks verify <suite>`: the invariant checks of the library, grouped into
//! suites. Exact checks compare rationals or closed forms; statistical checks
//! report how far the estimate is from its bound.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::FromPrimitive;
use rwalks_core::dynamics::{BiasRule, Scheduler, WalkerSystem};
use rwalks_core::ensemble::Execution;
use rwalks_core::env::{
    beta_ratio_moment, classify_additive_bias, effective_resistance, solomon_drift, Environment, RatioSide,
    Recurrence, SeriesRules,
};
use rwalks_core::ode::{balance_residual, integrate, vector_field, SimplexPoint};
use rwalks_core::reinforcement::ReinforcementScheme;
use rwalks_core::rng::stream_rng;
use rwalks_core::special::BetaParams;
use rwalks_core::stats::{
    ensemble_table, ks_statistic, left_fraction_at, martingale_drift, meeting_time_histogram, run_until_center_meeting,
    WalkBias,
};
use rwalks_core::urns::{alternating_martingale_check, enumerate_paths, polya_limit_params, ReplacementRule, Urn, UrnRecursionState};
use rwalks_core::{Graph, GraphSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Exact,
    Numeric,
    Statistical,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 4] = ["exact", "numeric", "statistical", "all"];
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Suite::Exact),
            "numeric" => Ok(Suite::Numeric),
            "statistical" => Ok(Suite::Statistical),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite `{s}`; expected one of: {}", Suite::NAMES.join(", "))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    fn failed(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {}: {}", self.name, self.detail)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Exact => exact(),
        Suite::Numeric => numeric(),
        Suite::Statistical => statistical(seed),
        Suite::All => {
            let mut all = exact();
            all.extend(numeric());
            all.extend(statistical(seed));
            all
        }
    }
}

fn rat(x: u32) -> BigRational {
    BigRational::from_u32(x).expect("small integer")
}

pub fn exact() -> Vec<Check> {
    vec![urn_identities(&[1, 2, 3], 5), alternating_identity(&[1, 2, 3]), beta_moment_identities(), polya_params()]
}

/// Enumeration, recursion and closed form agree as rationals.
pub fn urn_identities(weights: &[u32], max_l: u32) -> Check {
    let name = "two-player urn: enumeration = recursion = closed form";
    let mut cases = 0;
    for &a in weights {
        for &b in weights {
            let (ra, rb) = (rat(a), rat(b));
            let mut state = match UrnRecursionState::base(&ra, &rb) {
                Ok(s) => s,
                Err(e) => return Check::failed(name, e),
            };
            for l in 1..=max_l {
                let en = match enumerate_paths(&ra, &rb, l) {
                    Ok(e) => e,
                    Err(e) => return Check::failed(name, e),
                };
                let closed = UrnRecursionState::closed_form(&ra, &rb, l);
                if en.e != closed || en.q != closed || state.e != closed || state.q != closed {
                    return Check::new(
                        name,
                        false,
                        format!("a={a}, b={b}, l={l}: enumeration ({}, {}), recursion ({}, {}), closed {closed}", en.e, en.q, state.e, state.q),
                    );
                }
                cases += 1;
                state = state.step();
            }
        }
    }
    Check::new(name, true, format!("{cases} cases equal"))
}

pub fn alternating_identity(weights: &[u32]) -> Check {
    let name = "alternating 4-step conditional expectation = a/(a+b)";
    for &a in weights {
        for &b in weights {
            let (ra, rb) = (rat(a), rat(b));
            match alternating_martingale_check(&ra, &rb) {
                Ok(v) if v == &ra / (&ra + &rb) => {}
                Ok(v) => return Check::new(name, false, format!("a={a}, b={b}: {v}")),
                Err(e) => return Check::failed(name, e),
            }
        }
    }
    Check::new(name, true, format!("{} pairs equal", weights.len() * weights.len()))
}

fn beta_moment_identities() -> Check {
    let name = "Beta ratio moments: closed forms, divergence, symmetry";
    let p = |a, b| BetaParams::new(a, b).expect("valid");
    let one = beta_ratio_moment(p(2.0, 1.0), 1.0, RatioSide::FailureOverSuccess);
    let inf = beta_ratio_moment(p(1.0, 1.0), 1.0, RatioSide::FailureOverSuccess);
    let s1 = beta_ratio_moment(p(2.5, 2.5), 0.7, RatioSide::FailureOverSuccess);
    let s2 = beta_ratio_moment(p(2.5, 2.5), 0.7, RatioSide::SuccessOverFailure);
    let ok = (one - 1.0).abs() < 1e-13 && inf == f64::INFINITY && (s1 - s2).abs() < 1e-13 * s1;
    Check::new(name, ok, format!("E[(1-A)/A] for (2,1) = {one}, for (1,1) = {inf}; symmetric pair {s1} / {s2}"))
}

fn polya_params() -> Check {
    let name = "Pólya limit parameters (w/Δ, b/Δ)";
    match polya_limit_params(1.0, 1.0, 2.0) {
        Ok(p) => Check::new(name, p.alpha == 0.5 && p.beta == 0.5, format!("({}, {})", p.alpha, p.beta)),
        Err(e) => Check::failed(name, e),
    }
}

pub fn numeric() -> Vec<Check> {
    vec![ode_rest_point(), ode_balance(), rk4_order(), resistance_oracle(), drift_signs()]
}

pub fn ode_rest_point() -> Check {
    let name = "ODE field vanishes at the uniform point";
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        match vector_field(&SimplexPoint::uniform(), lambda) {
            Ok(f) => worst = f.iter().fold(worst, |m, x| m.max(x.abs())),
            Err(e) => return Check::failed(name, e),
        }
    }
    Check::new(name, worst < 1e-14, format!("max |f| = {worst:.3e} (bound 1e-14)"))
}

fn ode_balance() -> Check {
    let name = "stationary law solves the balance equations";
    let mut worst: f64 = 0.0;
    for c in [[0.2, 0.3, 0.5], [0.7, 0.2, 0.1], [0.01, 0.01, 0.98]] {
        let c = SimplexPoint::new(c).expect("on the simplex");
        for lambda in [0.3, 1.0, 2.0, 7.0] {
            match balance_residual(&c, lambda) {
                Ok(r) => worst = worst.max(r),
                Err(e) => return Check::failed(name, e),
            }
        }
    }
    Check::new(name, worst < 1e-12, format!("max residual {worst:.3e}"))
}

/// Step-halving ratio of the RK4 error against a fine reference; 16 for a
/// fourth-order method.
pub fn rk4_order_ratio(c0: &SimplexPoint, lambda: f64, horizon: f64, h: f64) -> rwalks_core::Result<f64> {
    let reference = integrate(c0, lambda, horizon, h / 64.0)?.final_point();
    let e1 = integrate(c0, lambda, horizon, h)?.final_point().max_distance(&reference);
    let e2 = integrate(c0, lambda, horizon, h / 2.0)?.final_point().max_distance(&reference);
    Ok(e1 / e2)
}

pub fn rk4_order() -> Check {
    let name = "RK4 step halving divides the error by about 16";
    let c0 = SimplexPoint::new([0.1, 0.45, 0.45]).expect("on the simplex");
    match rk4_order_ratio(&c0, 2.0, 5.0, 0.2) {
        Ok(r) => Check::new(name, (r - 16.0).abs() < 4.0, format!("ratio {r:.3}")),
        Err(e) => Check::failed(name, e),
    }
}

/// ω ≡ 2/3 gives R_eff = 2; ω ≡ 1/2 is recurrent.
pub fn resistance_oracle() -> Check {
    let name = "effective resistance of constant environments";
    let rules = SeriesRules::default();
    let (env_a, env_b) = match (Environment::constant(-2000, 2000, 2.0 / 3.0), Environment::constant(-2000, 2000, 0.5)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Check::failed(name, e),
    };
    let a = effective_resistance(&env_a, 2000, &rules);
    let b = effective_resistance(&env_b, 2000, &rules);
    let r = a.r_eff().unwrap_or(f64::NAN);
    let ok = (r - 2.0).abs() < 1e-10 && a.is_recurrent() == Some(false) && b.is_recurrent() == Some(true);
    Check::new(name, ok, format!("ω=2/3: {a:?}; ω=1/2: {b:?}"))
}

fn drift_signs() -> Check {
    let name = "drift sign matches the recurrence classification";
    let mut detail = Vec::new();
    let mut ok = true;
    for lambda in [0.0, 0.5, 1.0, 1.5, 2.0, 4.0] {
        let (d, class) = match (solomon_drift(lambda), classify_additive_bias(lambda)) {
            (Ok(d), Ok(c)) => (d.value, c),
            (Err(e), _) | (_, Err(e)) => return Check::failed(name, e),
        };
        ok &= match class {
            Recurrence::Recurrent if lambda == 1.0 => d.abs() < 1e-6,
            Recurrence::Recurrent => d > 0.0,
            Recurrence::TransientRight => d < 0.0,
        };
        detail.push(format!("λ={lambda}: {d:+.4e}"));
    }
    Check::new(name, ok, detail.join(", "))
}

pub fn statistical(seed: u64) -> Vec<Check> {
    vec![
        meeting_time_law(seed, 100_000),
        martingale_check(seed, 1.0, 3.0, 10_000),
        additive_speed(seed, 20, 100_000),
        polya_limit(seed, 10_000, 10_000),
    ]
}

fn segment_urn(a: f64, b: f64) -> rwalks_core::Result<WalkerSystem> {
    use rwalks_core::reinforcement::InitialWeights;
    use rwalks_core::EdgeKey;
    let graph = Arc::new(Graph::build(&GraphSpec::Segment { left: -1, right: 1 })?);
    let values = [(EdgeKey::new(-1, 0), a), (EdgeKey::new(0, 1), b)].into_iter().collect();
    let scheme = ReinforcementScheme::Linear { initial: InitialWeights::PerEdge { default: a, values }, delta: 1.0 };
    WalkerSystem::edge(graph, scheme, BiasRule::NoBias, Scheduler::UniformRandom(2), vec![0, 0])
}

/// Gaps between centre meetings: P(2l) = 2^{-l} within 4 binomial standard
/// errors for l = 1..6, and mean gap 4 ± 0.05.
pub fn meeting_time_law(seed: u64, episodes: u64) -> Check {
    let name = "meeting-time law P(gap = 2l) = 2^-l";
    let proto = match segment_urn(1.0, 1.0) {
        Ok(p) => p,
        Err(e) => return Check::failed(name, e),
    };
    let mut rng = stream_rng(seed, "verify/meeting", 0);
    let mut trajs = Vec::with_capacity(episodes as usize);
    for _ in 0..episodes {
        match run_until_center_meeting(&mut proto.clone(), &mut rng, 1_000_000) {
            Ok(t) => trajs.push(t),
            Err(e) => return Check::failed(name, e),
        }
    }
    let h = match meeting_time_histogram(&trajs) {
        Ok(h) => h,
        Err(e) => return Check::failed(name, e),
    };
    let n = h.gaps as f64;
    let mut worst: f64 = 0.0;
    for l in 1..=6 {
        let p = 0.5f64.powi(l);
        let se = (p * (1.0 - p) / n).sqrt();
        worst = worst.max((h.probability(2 * l as u64) - p).abs() / se);
    }
    let mean_err = (h.mean_gap - 4.0).abs();
    Check::new(
        name,
        worst < 4.0 && mean_err < 0.05,
        format!("worst deviation {worst:.2} SE (bound 4); mean gap {:.4} (4 ± 0.05)", h.mean_gap),
    )
}

fn martingale_check(seed: u64, a: f64, b: f64, episodes: usize) -> Check {
    let name = format!("left fraction is a martingale at meeting times (a={a}, b={b})");
    let proto = match segment_urn(a, b) {
        Ok(p) => p,
        Err(e) => return Check::failed(name, e),
    };
    let mut rng = stream_rng(seed, "verify/martingale", 0);
    let mut series = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let r = run_until_center_meeting(&mut proto.clone(), &mut rng, 1_000_000)
            .and_then(|t| left_fraction_at(&t, a, b, &[0, t.steps()]));
        match r {
            Ok(s) => series.push(s),
            Err(e) => return Check::failed(name, e),
        }
    }
    match martingale_drift(&series) {
        Ok(d) => Check::new(name, d.within(3.0), format!("drift {:+.3e} ± {:.3e} (bound 3 SE)", d.mean, d.se)),
        Err(e) => Check::failed(name, e),
    }
}

fn additive_speed(seed: u64, reps: usize, steps: u64) -> Check {
    let name = "additive bias λ=5 has speed 1/3";
    match ensemble_table(WalkBias::Additive, &[5.0], reps, steps, seed, Execution::default()) {
        Ok(t) => {
            let m = t.rows[0].speed_mean;
            Check::new(name, (m - 1.0 / 3.0).abs() < 0.02, format!("mean X_n/n = {m:.5} (1/3 ± 0.02)"))
        }
        Err(e) => Check::failed(name, e),
    }
}

/// Pólya urn w = b = 1, Δ = 2 against Beta(1/2, 1/2).
pub fn polya_limit(seed: u64, reps: usize, draws: u64) -> Check {
    let name = "Pólya white fraction approaches Beta(1/2, 1/2)";
    let (urn, limit) = match (Urn::new(1.0, 1.0, ReplacementRule::Polya { delta: 2.0 }), polya_limit_params(1.0, 1.0, 2.0)) {
        (Ok(u), Ok(l)) => (u, l),
        (Err(e), _) | (_, Err(e)) => return Check::failed(name, e),
    };
    let xs = rwalks_core::ensemble::map_replicates(reps, Execution::default(), |r| {
        let mut rng = stream_rng(seed, "verify/polya", r as u64);
        let mut u = urn.clone();
        for _ in 0..draws {
            u.draw(&mut rng);
        }
        u.white_fraction()
    });
    let ks = ks_statistic(&xs, |x| limit.cdf(x));
    Check::new(name, ks < 0.03, format!("KS = {ks:.4} (bound 0.03)"))
}
