//! Step engines for reinforced walks.
//!
//! A [`WalkerSystem`] holds k walkers on a shared graph, a scheduler picking
//! the walker that moves, a bias rule and the reinforcement state. Each call
//! to [`WalkerSystem::step`] moves exactly one walker along one edge.

mod trajectory;

use std::sync::Arc;

use rand::{Rng, RngExt};

use crate::error::{invalid, Error, Result};
use crate::graph::{DirectedEdge, Graph, NodeId};
use crate::reinforcement::{ReinforcementScheme, VertexScheme, VertexWeightState, WeightState};
use crate::rng::{seeded, SimRng};

pub use trajectory::{
    center_meeting_times, label_exchange, meeting_times, range_report, RangeReport, RecordMode, StepRecord,
    Trajectory, TrajectoryRecorder, WalkerSummary, FULL_RECORD_LIMIT,
};

/// How the edge weights at the current node are turned into transition weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasRule {
    NoBias,
    /// Right edge weight multiplied by λ (the λ* walk).
    Multiplicative(f64),
    /// λ added to the right edge weight (the λ⁺ walk).
    Additive(f64),
}

impl BiasRule {
    fn validate(&self) -> Result<()> {
        match *self {
            BiasRule::Multiplicative(l) if !(l.is_finite() && l > 0.0) => {
                invalid(format!("multiplicative bias needs λ > 0, got {l}"))
            }
            BiasRule::Additive(l) if !(l.is_finite() && l >= 0.0) => {
                invalid(format!("additive bias needs λ ≥ 0, got {l}"))
            }
            _ => Ok(()),
        }
    }

    /// Transition weights (left, right) from edge weights (left, right).
    #[inline]
    pub fn apply(&self, w_left: f64, w_right: f64) -> (f64, f64) {
        match *self {
            BiasRule::NoBias => (w_left, w_right),
            BiasRule::Multiplicative(l) => (w_left, l * w_right),
            BiasRule::Additive(l) => (w_left, l + w_right),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    Single,
    /// A walker chosen uniformly among k at every step.
    UniformRandom(usize),
    /// Walker 1 at odd steps, walker 2 at even steps.
    Alternating,
}

#[derive(Debug, Clone)]
pub enum Reinforcement {
    Edge(WeightState),
    Vertex(VertexWeightState),
}

#[derive(Debug, Clone)]
pub struct WalkerSystem {
    graph: Arc<Graph>,
    positions: Vec<NodeId>,
    scheduler: Scheduler,
    bias: BiasRule,
    state: Reinforcement,
    scratch: Vec<f64>,
}

impl WalkerSystem {
    /// Edge-reinforced walkers started at `positions`.
    pub fn edge(
        graph: Arc<Graph>,
        scheme: ReinforcementScheme,
        bias: BiasRule,
        scheduler: Scheduler,
        positions: Vec<NodeId>,
    ) -> Result<Self> {
        bias.validate()?;
        if bias != BiasRule::NoBias && !graph.is_oriented() {
            return invalid("biased walks need an oriented graph (segment, cycle or line)");
        }
        Self::check_positions(&graph, scheduler, &positions)?;
        let state = Reinforcement::Edge(WeightState::new(scheme)?);
        Ok(Self { graph, positions, scheduler, bias, state, scratch: Vec::new() })
    }

    /// A single vertex-reinforced walker.
    pub fn vertex(graph: Arc<Graph>, scheme: VertexScheme, start: NodeId) -> Result<Self> {
        Self::check_positions(&graph, Scheduler::Single, &[start])?;
        let state = Reinforcement::Vertex(VertexWeightState::new(scheme, start)?);
        Ok(Self {
            graph,
            positions: vec![start],
            scheduler: Scheduler::Single,
            bias: BiasRule::NoBias,
            state,
            scratch: Vec::new(),
        })
    }

    fn check_positions(graph: &Graph, scheduler: Scheduler, positions: &[NodeId]) -> Result<()> {
        let k = positions.len();
        let ok = match scheduler {
            Scheduler::Single => k == 1,
            Scheduler::UniformRandom(n) => n >= 1 && n == k,
            Scheduler::Alternating => k == 2,
        };
        if !ok {
            return invalid(format!("scheduler {scheduler:?} does not fit {k} walkers"));
        }
        if let Some(&v) = positions.iter().find(|v| !graph.contains(**v)) {
            return Err(Error::UnknownNode(v));
        }
        Ok(())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn positions(&self) -> &[NodeId] {
        &self.positions
    }

    pub fn bias(&self) -> BiasRule {
        self.bias
    }

    pub fn reinforcement(&self) -> &Reinforcement {
        &self.state
    }

    pub fn weights(&self) -> Option<&WeightState> {
        match &self.state {
            Reinforcement::Edge(ws) => Some(ws),
            Reinforcement::Vertex(_) => None,
        }
    }

    pub fn clock(&self) -> u64 {
        match &self.state {
            Reinforcement::Edge(ws) => ws.clock(),
            Reinforcement::Vertex(vs) => vs.clock(),
        }
    }

    /// Walker that moves at the next step under a deterministic scheduler.
    fn scheduled_walker<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self.scheduler {
            Scheduler::Single => 0,
            Scheduler::UniformRandom(k) => rng.random_range(0..k),
            Scheduler::Alternating => (self.clock() % 2) as usize,
        }
    }

    /// Transition probabilities of walker `m` from its current node.
    pub fn transition_probabilities(&self, m: usize) -> Vec<(NodeId, f64)> {
        let x = self.positions[m];
        let nb = self.graph.neighbors(x).expect("walker on graph");
        let w: Vec<f64> = match &self.state {
            Reinforcement::Vertex(vs) => nb.iter().map(|&t| vs.weight(t)).collect(),
            Reinforcement::Edge(ws) => {
                if nb.len() == 2 && self.graph.is_oriented() {
                    let (l, r) = self.bias.apply(ws.weight_between(x, nb[0]), ws.weight_between(x, nb[1]));
                    vec![l, r]
                } else {
                    nb.iter().map(|&t| ws.weight_between(x, t)).collect()
                }
            }
        };
        let total: f64 = w.iter().sum();
        nb.iter().zip(w).map(|(&t, wt)| (t, wt / total)).collect()
    }

    /// Move one walker. Vertex-reinforced systems delegate to [`Self::step_vrrw`].
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepRecord {
        if matches!(self.state, Reinforcement::Vertex(_)) {
            return self.step_vrrw(rng);
        }
        let m = self.scheduled_walker(rng);
        let x = self.positions[m];
        let Reinforcement::Edge(ws) = &mut self.state else { unreachable!() };
        let nb = self.graph.neighbors(x).expect("walker on graph");
        let to = match nb.len() {
            1 => nb[0],
            2 => {
                let (wl, wr) = (ws.weight_between(x, nb[0]), ws.weight_between(x, nb[1]));
                let (l, r) = if self.graph.is_oriented() { self.bias.apply(wl, wr) } else { (wl, wr) };
                let u: f64 = rng.random();
                if u * (l + r) < r {
                    nb[1]
                } else {
                    nb[0]
                }
            }
            _ => {
                self.scratch.clear();
                self.scratch.extend(nb.iter().map(|&t| ws.weight_between(x, t)));
                nb[pick(&self.scratch, rng)]
            }
        };
        ws.record_traversal(DirectedEdge::new(x, to));
        self.positions[m] = to;
        StepRecord { time: ws.clock(), walker: m as u32, from: x, to }
    }

    /// One step of the vertex-reinforced walk: neighbour t is chosen with
    /// probability proportional to W_t(z(n, t)).
    pub fn step_vrrw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepRecord {
        let Reinforcement::Vertex(vs) = &mut self.state else {
            panic!("step_vrrw called on an edge-reinforced system");
        };
        let x = self.positions[0];
        let nb = self.graph.neighbors(x).expect("walker on graph");
        self.scratch.clear();
        self.scratch.extend(nb.iter().map(|&t| vs.weight(t)));
        let to = nb[pick(&self.scratch, rng)];
        vs.record_visit(to);
        self.positions[0] = to;
        StepRecord { time: vs.clock(), walker: 0, from: x, to }
    }
}

/// Index drawn with probability proportional to `weights`.
#[inline]
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Run `n_steps` steps with a generator seeded by `seed`.
pub fn run(sys: &mut WalkerSystem, n_steps: u64, seed: u64) -> Trajectory {
    run_with(sys, n_steps, &mut seeded(seed), RecordMode::Auto)
}

/// Run `n_steps` steps drawing from `rng`.
pub fn run_with(sys: &mut WalkerSystem, n_steps: u64, rng: &mut SimRng, mode: RecordMode) -> Trajectory {
    let mut rec = TrajectoryRecorder::new(sys.positions(), n_steps, mode);
    for _ in 0..n_steps {
        rec.push(sys.step(rng));
    }
    rec.finish()
}
