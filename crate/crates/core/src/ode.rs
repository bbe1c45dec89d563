//! The λ*-biased walk on the triangle and its mean-field flow.
//!
//! Nodes are 1, 2, 3 with r(x) = x mod 3 + 1. Edge i joins i and r(i), so
//! edge 1 = {1,2}, edge 2 = {2,3}, edge 3 = {3,1}. With the normalized edge
//! weights frozen at c the walk is a Markov chain; its edge occupation
//! measure π_edge drives the flow dc/dt = π_edge(c) − c.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dynamics::{BiasRule, Scheduler, WalkerSystem};
use crate::ensemble::{map_replicates, Execution};
use crate::error::{invalid, Error, Result};
use crate::graph::{EdgeKey, Graph, GraphSpec};
use crate::reinforcement::{InitialWeights, ReinforcementScheme};
use crate::rng::SimRng;

const SUM_TOL: f64 = 1e-12;

/// Per-step renormalization above this size flags the integration as inaccurate.
pub const CORRECTION_WARN: f64 = 1e-6;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexPoint([f64; 3]);

impl SimplexPoint {
    pub fn new(c: [f64; 3]) -> Result<Self> {
        if c.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Domain(format!("simplex components must be nonnegative, got {c:?}")));
        }
        let s: f64 = c.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("simplex components sum to {s}")));
        }
        Ok(Self(c))
    }

    /// Scales nonnegative weights onto the simplex.
    pub fn normalize(w: [f64; 3]) -> Result<Self> {
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Domain(format!("weights must be nonnegative, got {w:?}")));
        }
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return Err(Error::Domain("weights are all zero".into()));
        }
        Ok(Self(w.map(|x| x / s)))
    }

    pub fn uniform() -> Self {
        Self([1.0 / 3.0; 3])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn l1_distance(&self, other: &SimplexPoint) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn max_distance(&self, other: &SimplexPoint) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// (c1, c2, c3) -> (c2, c3, c1).
    pub fn rotate(&self) -> Self {
        let [a, b, c] = self.0;
        Self([b, c, a])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryDist {
    pub node: [f64; 3],
    pub edge: [f64; 3],
}

fn check(c: &SimplexPoint, lambda: f64) -> Result<[f64; 3]> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return invalid(format!("λ must be positive, got {lambda}"));
    }
    if !c.is_interior() {
        return Err(Error::Domain(format!("point {:?} lies on the simplex boundary", c.0)));
    }
    Ok(c.0)
}

/// Unnormalized π(1); π(2) and π(3) come from shifting the arguments.
fn node_weight(l: f64, c1: f64, c2: f64, c3: f64) -> f64 {
    l.powi(3) * c1 * c2 * c3
        + l * l * (c1 * c1 * c3 + c2 * c3 * c3)
        + l * (c1 * c1 * c2 + c1 * c3 * c3)
        + c1 * c2 * c3
}

pub fn stationary_node_dist(c: &SimplexPoint, lambda: f64) -> Result<[f64; 3]> {
    let [c1, c2, c3] = check(c, lambda)?;
    let w = [node_weight(lambda, c1, c2, c3), node_weight(lambda, c2, c3, c1), node_weight(lambda, c3, c1, c2)];
    let z: f64 = w.iter().sum();
    Ok(w.map(|x| x / z))
}

/// Long-run fraction of steps spent crossing each edge.
pub fn stationary_edge_dist(c: &SimplexPoint, lambda: f64) -> Result<[f64; 3]> {
    Ok(stationary(c, lambda)?.edge)
}

pub fn stationary(c: &SimplexPoint, lambda: f64) -> Result<StationaryDist> {
    let pi = stationary_node_dist(c, lambda)?;
    let p = transition_matrix(c, lambda)?;
    // edge i is crossed from i to the right or from r(i) to the left
    let edge = std::array::from_fn(|i| {
        let j = (i + 1) % 3;
        p[i][j] * pi[i] + p[j][i] * pi[j]
    });
    Ok(StationaryDist { node: pi, edge })
}

/// Row-stochastic matrix of the frozen chain, indices 0..3 for nodes 1..3.
pub fn transition_matrix(c: &SimplexPoint, lambda: f64) -> Result<[[f64; 3]; 3]> {
    let c = check(c, lambda)?;
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        let (r, l) = ((i + 1) % 3, (i + 2) % 3);
        // right edge of i is edge i, left edge is edge l(i)
        let (wr, wl) = (lambda * c[i], c[l]);
        p[i][r] = wr / (wr + wl);
        p[i][l] = wl / (wr + wl);
    }
    Ok(p)
}

/// max_j |(πP)_j − π_j| for the closed-form π.
pub fn balance_residual(c: &SimplexPoint, lambda: f64) -> Result<f64> {
    let pi = stationary_node_dist(c, lambda)?;
    let p = transition_matrix(c, lambda)?;
    Ok((0..3)
        .map(|j| ((0..3).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max))
}

pub fn vector_field(c: &SimplexPoint, lambda: f64) -> Result<[f64; 3]> {
    let e = stationary_edge_dist(c, lambda)?;
    Ok(std::array::from_fn(|i| e[i] - c.0[i]))
}

/// The field at a point clamped onto the simplex. Faces are allowed, only the
/// vertices (two zero weights) are singular. Returns the field and the L1 size
/// of the clamp.
fn field_projected(x: [f64; 3], lambda: f64) -> Result<([f64; 3], f64)> {
    let p = SimplexPoint::normalize(x.map(|v| v.max(0.0)))?;
    let moved: f64 = x.iter().zip(p.0).map(|(a, b)| (a - b).abs()).sum();
    let [c1, c2, c3] = p.0;
    let w = [node_weight(lambda, c1, c2, c3), node_weight(lambda, c2, c3, c1), node_weight(lambda, c3, c1, c2)];
    let z: f64 = w.iter().sum();
    let mut f = [0.0; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let right = lambda * p.0[i] / (lambda * p.0[i] + p.0[(i + 2) % 3]);
        let left = p.0[i] / (lambda * p.0[j] + p.0[i]);
        f[i] = (right * w[i] + left * w[j]) / z - p.0[i];
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("integration reached a simplex vertex at {:?}", p.0)));
    }
    Ok((f, moved))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub lambda: f64,
    pub step: f64,
    /// (t, c(t)) after every step, starting with (0, c0).
    pub points: Vec<(f64, SimplexPoint)>,
    /// Largest L1 change made by projecting a stage or step result onto the simplex.
    pub max_correction: f64,
    pub accuracy_warning: bool,
}

impl OdeTrajectory {
    pub fn final_point(&self) -> SimplexPoint {
        self.points.last().expect("trajectory holds c0").1
    }

    pub fn horizon(&self) -> f64 {
        self.points.last().expect("trajectory holds c0").0
    }
}

fn axpy(x: [f64; 3], a: f64, k: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| x[i] + a * k[i])
}

/// Classical RK4 with fixed step `h` up to `horizon`; the last step is
/// shortened to land on the horizon exactly.
pub fn integrate(c0: &SimplexPoint, lambda: f64, horizon: f64, h: f64) -> Result<OdeTrajectory> {
    check(c0, lambda)?;
    if !(h.is_finite() && h > 0.0) {
        return invalid(format!("step must be positive, got {h}"));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return invalid(format!("horizon must be nonnegative, got {horizon}"));
    }
    let n = (horizon / h).ceil() as usize;
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, *c0));
    let mut c = *c0;
    let mut max_correction = 0.0f64;
    for k in 0..n {
        let t0 = k as f64 * h;
        let dt = (horizon - t0).min(h);
        let x = c.0;
        let (k1, _) = field_projected(x, lambda)?;
        let (k2, m2) = field_projected(axpy(x, dt / 2.0, k1), lambda)?;
        let (k3, m3) = field_projected(axpy(x, dt / 2.0, k2), lambda)?;
        let (k4, m4) = field_projected(axpy(x, dt, k3), lambda)?;
        let raw: [f64; 3] = std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let next = SimplexPoint::normalize(raw.map(|v| v.max(0.0)))?;
        let corr: f64 = raw.iter().zip(next.0).map(|(a, b)| (a - b).abs()).sum();
        max_correction = max_correction.max(corr.max(m2).max(m3).max(m4));
        if !next.is_interior() {
            return Err(Error::Domain(format!("integration left the simplex interior at t = {}", t0 + dt)));
        }
        c = next;
        points.push((t0 + dt, c));
    }
    Ok(OdeTrajectory {
        lambda,
        step: h,
        points,
        max_correction,
        accuracy_warning: max_correction > CORRECTION_WARN,
    })
}

/// Integrates several initial conditions.
pub fn integrate_batch(
    starts: &[SimplexPoint],
    lambda: f64,
    horizon: f64,
    h: f64,
    exec: Execution,
) -> Vec<Result<OdeTrajectory>> {
    map_replicates(starts.len(), exec, |i| integrate(&starts[i], lambda, horizon, h))
}

/// The three triangle edges in flow order.
pub fn triangle_edges() -> [EdgeKey; 3] {
    [EdgeKey::new(1, 2), EdgeKey::new(2, 3), EdgeKey::new(3, 1)]
}

/// Flow time matching `steps` steps of the reinforced walk started with total
/// edge weight `initial_total`: each step adds one unit of weight, and the
/// flow runs on the logarithm of the total weight.
pub fn flow_time(initial_total: f64, steps: u64) -> f64 {
    ((initial_total + steps as f64) / initial_total).ln()
}

/// Runs the λ*-biased edge-reinforced walk on the triangle from node 1 with
/// initial edge weights `initial` (edges in flow order) and returns the
/// normalized edge weights after `steps` steps.
pub fn simulate_triangle(lambda: f64, initial: [f64; 3], steps: u64, rng: &mut SimRng) -> Result<SimplexPoint> {
    let graph = Arc::new(Graph::build(&GraphSpec::Cycle { len: 3 })?);
    let edges = triangle_edges();
    let values: HashMap<EdgeKey, f64> = edges.iter().copied().zip(initial).collect();
    let scheme = ReinforcementScheme::Linear {
        initial: InitialWeights::PerEdge { default: 1.0, values },
        delta: 1.0,
    };
    let mut sys = WalkerSystem::edge(graph, scheme, BiasRule::Multiplicative(lambda), Scheduler::Single, vec![1])?;
    for _ in 0..steps {
        sys.step(rng);
    }
    let w = sys.weights().expect("edge-reinforced system");
    SimplexPoint::normalize(edges.map(|e| w.weight(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, stream_rng};
    use proptest::prelude::*;
    use rand::RngExt;

    fn pt(c: [f64; 3]) -> SimplexPoint {
        SimplexPoint::normalize(c).unwrap()
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexPoint::new([0.5, 0.5, 0.0]).is_ok());
        assert!(SimplexPoint::new([0.5, 0.6, -0.1]).is_err());
        assert!(SimplexPoint::new([0.5, 0.5, 0.1]).is_err());
        assert!(SimplexPoint::normalize([0.0; 3]).is_err());
    }

    #[test]
    fn boundary_points_are_rejected() {
        let c = SimplexPoint::new([0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(stationary_node_dist(&c, 2.0), Err(Error::Domain(_))));
        assert!(matches!(vector_field(&c, 2.0), Err(Error::Domain(_))));
        assert!(integrate(&c, 2.0, 1.0, 1e-2).is_err());
    }

    #[test]
    fn uniform_is_a_rest_point() {
        for lambda in [0.3, 1.0, 2.0, 7.5] {
            let s = stationary(&SimplexPoint::uniform(), lambda).unwrap();
            for i in 0..3 {
                assert!((s.node[i] - 1.0 / 3.0).abs() < 1e-15);
                assert!((s.edge[i] - 1.0 / 3.0).abs() < 1e-15);
            }
            let f = vector_field(&SimplexPoint::uniform(), lambda).unwrap();
            assert!(f.iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn closed_form_solves_balance_equations() {
        let mut rng = seeded(3);
        for _ in 0..200 {
            let c = pt([rng.random::<f64>() + 1e-3, rng.random::<f64>() + 1e-3, rng.random::<f64>() + 1e-3]);
            let lambda = 0.1 + 5.0 * rng.random::<f64>();
            assert!(balance_residual(&c, lambda).unwrap() < 1e-10);
        }
    }

    #[test]
    fn edge_occupation_matches_frozen_chain() {
        // frozen chain run as a non-reinforced walk through the step engine
        let c = pt([0.5, 0.25, 0.25]);
        for (lambda, bias) in [(1.0, BiasRule::NoBias), (2.0, BiasRule::Multiplicative(2.0))] {
            let want = stationary_edge_dist(&c, lambda).unwrap();
            let graph = Arc::new(Graph::build(&GraphSpec::Cycle { len: 3 }).unwrap());
            let values = triangle_edges().into_iter().zip(c.components()).collect();
            let scheme = ReinforcementScheme::None { initial: InitialWeights::PerEdge { default: 1.0, values } };
            let mut sys = WalkerSystem::edge(graph, scheme, bias, Scheduler::Single, vec![1]).unwrap();
            let mut rng = seeded(17);
            let n = 1_000_000u64;
            for _ in 0..n {
                sys.step(&mut rng);
            }
            let w = sys.weights().unwrap();
            for (i, e) in triangle_edges().into_iter().enumerate() {
                let freq = w.z(e) as f64 / n as f64;
                assert!((freq - want[i]).abs() < 0.005, "λ={lambda} edge {i}: {freq} vs {}", want[i]);
            }
        }
    }

    #[test]
    fn field_points_inward_from_heavy_edge() {
        let c = pt([0.8, 0.1, 0.1]);
        let f = vector_field(&c, 2.0).unwrap();
        assert!(f[0] < 0.0);
        // mean drift of the simulated walk over a short window has the same signs
        let k = 200u64;
        let reps = 400;
        let mut drift = [0.0; 3];
        for r in 0..reps {
            let mut rng = stream_rng(5, "drift", r);
            let end = simulate_triangle(2.0, [800.0, 100.0, 100.0], k, &mut rng).unwrap();
            for i in 0..3 {
                drift[i] += (end.components()[i] - c.components()[i]) / reps as f64;
            }
        }
        for i in 0..3 {
            if f[i].abs() > 0.05 {
                assert_eq!(drift[i].signum(), f[i].signum(), "component {i}: {drift:?} vs {f:?}");
            }
        }
    }

    #[test]
    fn uniform_start_stays_put() {
        let tr = integrate(&SimplexPoint::uniform(), 2.0, 5.0, 1e-2).unwrap();
        assert!(tr.points.iter().all(|(_, p)| p.max_distance(&SimplexPoint::uniform()) < 1e-14));
        assert!(!tr.accuracy_warning);
    }

    #[test]
    fn endpoints_match_reference_integration() {
        // reference from an independent 8th-order adaptive integrator at rtol 1e-13
        let reference = [
            (10.0, [0.332_717_308_242_054_5, 0.256_431_779_067_365_3, 0.410_850_912_690_579_44]),
            (50.0, [0.333_445_413_893_279_4, 0.333_041_626_411_621_16, 0.333_512_959_695_099_25]),
        ];
        let tr = integrate(&pt([0.1, 0.45, 0.45]), 2.0, 50.0, DEFAULT_STEP).unwrap();
        assert!((tr.horizon() - 50.0).abs() < 1e-9);
        assert!(!tr.accuracy_warning);
        for (t, want) in reference {
            let (_, got) = tr.points[(t / DEFAULT_STEP).round() as usize];
            assert!(got.max_distance(&SimplexPoint(want)) < 1e-10, "t={t}: {got:?}");
        }
    }

    #[test]
    fn converges_to_uniform_eventually() {
        // the slow spiral contracts like exp(-t (λ-1)²/(λ²+λ+1))
        let tr = integrate(&pt([0.1, 0.45, 0.45]), 2.0, 120.0, 1e-2).unwrap();
        assert!(tr.final_point().max_distance(&SimplexPoint::uniform()) < 1e-6);
        let tr = integrate(&pt([0.1, 0.45, 0.45]), 5.0, 50.0, DEFAULT_STEP).unwrap();
        assert!(tr.final_point().max_distance(&SimplexPoint::uniform()) < 1e-6);
    }

    #[test]
    fn neutral_walk_does_not_move() {
        // λ = 1 makes every point a rest point
        let c = pt([0.2, 0.3, 0.5]);
        assert!(vector_field(&c, 1.0).unwrap().iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let c0 = pt([0.1, 0.45, 0.45]);
        let end = |h: f64| integrate(&c0, 2.0, 10.0, h).unwrap().final_point();
        let (a, b, c) = (end(0.2), end(0.1), end(0.05));
        let ratio = a.max_distance(&b) / b.max_distance(&c);
        assert!((ratio - 16.0).abs() < 4.0, "ratio {ratio}");
    }

    #[test]
    fn coarse_steps_raise_the_warning() {
        let tr = integrate(&pt([0.02, 0.49, 0.49]), 2.0, 10.0, 6.0).unwrap();
        assert!(tr.max_correction > CORRECTION_WARN);
        assert!(tr.accuracy_warning);
    }

    #[test]
    fn batch_matches_single_runs() {
        let starts = [pt([0.1, 0.45, 0.45]), pt([0.6, 0.3, 0.1])];
        let batch = integrate_batch(&starts, 2.0, 3.0, 1e-2, Execution::Sequential);
        for (s, b) in starts.iter().zip(batch) {
            assert_eq!(b.unwrap(), integrate(s, 2.0, 3.0, 1e-2).unwrap());
        }
    }

    #[test]
    fn flow_time_of_simulation() {
        assert!((flow_time(1000.0, 100_000) - 101f64.ln()).abs() < 1e-12);
        assert_eq!(flow_time(1000.0, 0), 0.0);
    }

    proptest! {
        #[test]
        fn field_sums_to_zero(a in 1e-3f64..1.0, b in 1e-3f64..1.0, c in 1e-3f64..1.0, lambda in 0.05f64..10.0) {
            let p = pt([a, b, c]);
            let f = vector_field(&p, lambda).unwrap();
            prop_assert!(f.iter().sum::<f64>().abs() < 1e-12);
            let s = stationary(&p, lambda).unwrap();
            prop_assert!((s.node.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((s.edge.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(s.node.iter().chain(&s.edge).all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn rotation_commutes(a in 1e-3f64..1.0, b in 1e-3f64..1.0, c in 1e-3f64..1.0, lambda in 0.05f64..10.0) {
            let p = pt([a, b, c]);
            let s = stationary(&p, lambda).unwrap();
            let r = stationary(&p.rotate(), lambda).unwrap();
            for i in 0..3 {
                prop_assert!((r.node[i] - s.node[(i + 1) % 3]).abs() < 1e-12);
                prop_assert!((r.edge[i] - s.edge[(i + 1) % 3]).abs() < 1e-12);
            }
        }

        #[test]
        fn integration_stays_on_simplex(a in 0.01f64..1.0, b in 0.01f64..1.0, c in 0.01f64..1.0, lambda in 0.2f64..5.0) {
            let tr = integrate(&pt([a, b, c]), lambda, 2.0, 0.05).unwrap();
            for (_, p) in &tr.points {
                prop_assert!(SimplexPoint::new(p.components()).is_ok());
            }
        }
    }
}
