//! Reinforcement schemes and the weight state of a reinforced walk.

use std::collections::HashMap;

use crate::dense::SignedVec;
use crate::error::{invalid, Result};
use crate::graph::{DirectedEdge, EdgeKey, NodeId};

/// Initial edge weights a_e.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialWeights {
    Uniform(f64),
    /// a_e = base^lo for the edge {lo, hi}; on ℤ the edge {z, z+1} starts at base^z.
    Geometric { base: f64 },
    PerEdge { default: f64, values: HashMap<EdgeKey, f64> },
}

impl InitialWeights {
    #[inline]
    pub fn get(&self, e: EdgeKey) -> f64 {
        match self {
            InitialWeights::Uniform(a) => *a,
            InitialWeights::Geometric { base } => base.powf(e.lo as f64),
            InitialWeights::PerEdge { default, values } => values.get(&e).copied().unwrap_or(*default),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        match self {
            InitialWeights::Uniform(a) if !ok(*a) => invalid(format!("initial weight must be positive, got {a}")),
            InitialWeights::Geometric { base } if !ok(*base) => {
                invalid(format!("geometric base must be positive, got {base}"))
            }
            InitialWeights::PerEdge { default, values } => {
                if !ok(*default) || values.values().any(|v| !ok(*v)) {
                    return invalid("per-edge initial weights must be positive");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// The weight functions W_e(k), k = number of traversals of e.
#[derive(Debug, Clone, PartialEq)]
pub enum ReinforcementScheme {
    /// W_e(k) = a_e + Δ·k.
    Linear { initial: InitialWeights, delta: f64 },
    /// W_e(k) read from a table; edges without their own table use `default`.
    /// Past the end of a table the last entry is held.
    Tabulated { default: Vec<f64>, per_edge: HashMap<EdgeKey, Vec<f64>> },
    /// W_e(k) = a_e for all k.
    None { initial: InitialWeights },
}

impl ReinforcementScheme {
    /// Linear reinforcement with uniform initial weight `a` and increment `delta`.
    pub fn linear(a: f64, delta: f64) -> Self {
        ReinforcementScheme::Linear { initial: InitialWeights::Uniform(a), delta }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReinforcementScheme::Linear { initial, delta } => {
                initial.validate()?;
                if !(delta.is_finite() && *delta > 0.0) {
                    return invalid(format!("increment must be positive, got {delta}"));
                }
                Ok(())
            }
            ReinforcementScheme::None { initial } => initial.validate(),
            ReinforcementScheme::Tabulated { default, per_edge } => {
                for t in std::iter::once(default).chain(per_edge.values()) {
                    if t.is_empty() {
                        return invalid("weight table is empty");
                    }
                    if t.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                        return invalid("weight table entries must be positive");
                    }
                    if t.windows(2).any(|p| p[1] < p[0]) {
                        return invalid("weight table must be nondecreasing");
                    }
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn weight(&self, e: EdgeKey, k: u64) -> f64 {
        match self {
            ReinforcementScheme::Linear { initial, delta } => initial.get(e) + delta * k as f64,
            ReinforcementScheme::None { initial } => initial.get(e),
            ReinforcementScheme::Tabulated { default, per_edge } => {
                let t = per_edge.get(&e).unwrap_or(default);
                t[(k as usize).min(t.len() - 1)]
            }
        }
    }
}

/// Traversal counts of one edge: `[lo→hi, hi→lo]`.
pub type EdgeCounts = [u64; 2];

/// Clock, traversal counts and current weights of an edge-reinforced walk.
///
/// Edges never traversed are not stored: they have z = 0 and weight W_e(0).
#[derive(Debug, Clone)]
pub struct WeightState {
    clock: u64,
    scheme: ReinforcementScheme,
    /// Edges {j, j+1}, indexed by j.
    unit: SignedVec<EdgeCounts>,
    other: HashMap<EdgeKey, EdgeCounts>,
}

impl WeightState {
    pub fn new(scheme: ReinforcementScheme) -> Result<Self> {
        scheme.validate()?;
        Ok(Self { clock: 0, scheme, unit: SignedVec::new([0, 0]), other: HashMap::new() })
    }

    pub fn scheme(&self) -> &ReinforcementScheme {
        &self.scheme
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    #[inline]
    pub fn counts(&self, e: EdgeKey) -> EdgeCounts {
        if e.hi == e.lo + 1 {
            *self.unit.get(e.lo)
        } else {
            self.other.get(&e).copied().unwrap_or([0, 0])
        }
    }

    /// z(n, e): undirected traversal count.
    #[inline]
    pub fn z(&self, e: EdgeKey) -> u64 {
        let c = self.counts(e);
        c[0] + c[1]
    }

    /// z⃗(n, (u, v)): traversals from u to v.
    pub fn z_directed(&self, e: DirectedEdge) -> u64 {
        self.counts(e.key())[usize::from(!e.is_forward())]
    }

    /// w(n, e) = W_e(z(n, e)).
    #[inline]
    pub fn weight(&self, e: EdgeKey) -> f64 {
        self.scheme.weight(e, self.z(e))
    }

    #[inline]
    pub fn weight_between(&self, u: NodeId, v: NodeId) -> f64 {
        self.weight(EdgeKey::new(u, v))
    }

    /// Advance the clock and count one traversal of `e`.
    #[inline]
    pub fn record_traversal(&mut self, e: DirectedEdge) {
        let key = e.key();
        let slot = if key.hi == key.lo + 1 {
            self.unit.get_mut(key.lo)
        } else {
            self.other.entry(key).or_insert([0, 0])
        };
        slot[usize::from(!e.is_forward())] += 1;
        self.clock += 1;
    }

    /// All edges traversed at least once, with their counts, in key order.
    pub fn traversed_edges(&self) -> Vec<(EdgeKey, EdgeCounts)> {
        let mut out: Vec<_> = self
            .unit
            .iter()
            .filter(|(_, c)| c[0] + c[1] > 0)
            .map(|(j, c)| (EdgeKey::new(j, j + 1), *c))
            .chain(self.other.iter().map(|(k, c)| (*k, *c)))
            .collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }
}

/// Vertex weights W_v(k) = initial + delta·k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexScheme {
    pub initial: f64,
    pub delta: f64,
}

impl VertexScheme {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial.is_finite() && self.initial > 0.0) || !(self.delta.is_finite() && self.delta >= 0.0) {
            return invalid("vertex weights need initial > 0 and delta >= 0");
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, k: u64) -> f64 {
        self.initial + self.delta * k as f64
    }
}

/// Clock and visit counts of a vertex-reinforced walk.
///
/// z(n, v) counts arrivals at v during steps 1..=n; the starting node is
/// tracked separately so that occupation counts sum to n + 1.
#[derive(Debug, Clone)]
pub struct VertexWeightState {
    clock: u64,
    scheme: VertexScheme,
    start: NodeId,
    visits: SignedVec<u64>,
}

impl VertexWeightState {
    pub fn new(scheme: VertexScheme, start: NodeId) -> Result<Self> {
        scheme.validate()?;
        Ok(Self { clock: 0, scheme, start, visits: SignedVec::new(0) })
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn scheme(&self) -> VertexScheme {
        self.scheme
    }

    /// z(n, v).
    #[inline]
    pub fn z(&self, v: NodeId) -> u64 {
        *self.visits.get(v)
    }

    /// Times at which the walk was at v, counting time 0.
    pub fn occupation(&self, v: NodeId) -> u64 {
        self.z(v) + u64::from(v == self.start)
    }

    #[inline]
    pub fn weight(&self, v: NodeId) -> f64 {
        self.scheme.weight(self.z(v))
    }

    #[inline]
    pub fn record_visit(&mut self, v: NodeId) {
        *self.visits.get_mut(v) += 1;
        self.clock += 1;
    }

    pub fn total_occupation(&self) -> u64 {
        self.visits.iter().map(|(_, c)| *c).sum::<u64>() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_traversals() {
        let mut ws = WeightState::new(ReinforcementScheme::linear(1.0, 1.0)).unwrap();
        let e = EdgeKey::new(0, 1);
        ws.record_traversal(DirectedEdge::new(0, 1));
        assert_eq!((ws.weight(e), ws.z(e)), (2.0, 1));
        assert_eq!(ws.z_directed(DirectedEdge::new(0, 1)), 1);
        assert_eq!(ws.z_directed(DirectedEdge::new(1, 0)), 0);
        ws.record_traversal(DirectedEdge::new(1, 0));
        assert_eq!(ws.weight(e), 3.0);
        assert_eq!(ws.z_directed(DirectedEdge::new(1, 0)), 1);
        assert_eq!(ws.clock(), 2);
    }

    #[test]
    fn no_reinforcement_keeps_weight() {
        let mut ws = WeightState::new(ReinforcementScheme::None { initial: InitialWeights::Uniform(0.7) }).unwrap();
        for _ in 0..5 {
            ws.record_traversal(DirectedEdge::new(4, 9));
        }
        assert_eq!(ws.weight(EdgeKey::new(4, 9)), 0.7);
        assert_eq!(ws.z(EdgeKey::new(4, 9)), 5);
    }

    #[test]
    fn geometric_initial_weights() {
        let ws = WeightState::new(ReinforcementScheme::Linear {
            initial: InitialWeights::Geometric { base: 4.0 },
            delta: 1.0,
        })
        .unwrap();
        assert_eq!(ws.weight(EdgeKey::new(2, 3)), 16.0);
        assert_eq!(ws.weight(EdgeKey::new(-1, 0)), 0.25);
    }

    #[test]
    fn tabulated_holds_last_entry() {
        let s = ReinforcementScheme::Tabulated { default: vec![1.0, 5.0, 6.0], per_edge: HashMap::new() };
        assert_eq!(s.weight(EdgeKey::new(0, 1), 1), 5.0);
        assert_eq!(s.weight(EdgeKey::new(0, 1), 10), 6.0);
        let bad = ReinforcementScheme::Tabulated { default: vec![2.0, 1.0], per_edge: HashMap::new() };
        assert!(bad.validate().is_err());
        assert!(ReinforcementScheme::linear(0.0, 1.0).validate().is_err());
        assert!(ReinforcementScheme::linear(1.0, 0.0).validate().is_err());
    }

    #[test]
    fn vertex_occupation_counts_start_once() {
        let mut vs = VertexWeightState::new(VertexScheme { initial: 1.0, delta: 1.0 }, 0).unwrap();
        vs.record_visit(1);
        vs.record_visit(0);
        vs.record_visit(1);
        assert_eq!(vs.total_occupation(), vs.clock() + 1);
        assert_eq!(vs.occupation(0), 2);
        assert_eq!(vs.weight(1), 3.0);
    }

    proptest! {
        #[test]
        fn counts_stay_consistent(steps in proptest::collection::vec((-5i64..5, any::<bool>(), 1i64..3), 0..200),
                                  a4 in 1u32..40, d4 in 1u32..20) {
            // Quarter-integer weights keep every sum exactly representable.
            let (a, delta) = (f64::from(a4) / 4.0, f64::from(d4) / 4.0);
            let mut ws = WeightState::new(ReinforcementScheme::linear(a, delta)).unwrap();
            let mut keys = std::collections::BTreeSet::new();
            for (x, fwd, len) in &steps {
                let e = if *fwd { DirectedEdge::new(*x, x + len) } else { DirectedEdge::new(x + len, *x) };
                ws.record_traversal(e);
                keys.insert(e.key());
                for k in &keys {
                    let d = ws.z_directed(DirectedEdge::new(k.lo, k.hi)) + ws.z_directed(DirectedEdge::new(k.hi, k.lo));
                    prop_assert_eq!(ws.z(*k), d);
                    prop_assert_eq!(ws.weight(*k) - a, delta * ws.z(*k) as f64);
                    prop_assert!(ws.weight(*k) > 0.0);
                }
            }
            let total: u64 = keys.iter().map(|k| ws.z(*k)).sum();
            prop_assert_eq!(total, ws.clock());
            prop_assert_eq!(ws.traversed_edges().len(), keys.len());
        }
    }
}
