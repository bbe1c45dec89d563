//! Coupling of the linearly reinforced walk with two Bernoulli sequences.
//!
//! Fix a simple path γ from v0. For every interior vertex v = tail(f) with
//! f ∈ γ, f ≠ γ₁, let e be the reverse of the path edge entering v. Two
//! sequences are attached to v:
//!
//! * P[Y'_j = 1] = (1+a)/(2j+1+Ka), a lower bound for leaving along e on the
//!   (j+1)-th visit while e is unused;
//! * P[Y_j = 1] = a/(j+1+2a), an upper bound for choosing f among {e, f} at
//!   the (j+1)-th use of e or f.
//!
//! Every coupled choice shares one uniform between the walk and the
//! Bernoulli draw, so the walk obeys the right marginals while the bounds
//! hold pathwise. The dominating ratio is Q̄ = M̄_f / M̄_e with
//! M̄_f = min{j ≥ 1 : Y'_j = 1}, M̄_e = 1 if Y'_0 = 0 and M̄_e =
//! min{j ≥ 1 : Y_j = 1}, M̄_f = 1 otherwise.

use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, RngExt};

use crate::ensemble::{map_replicates, Execution};
use crate::error::{invalid, Error, Result};
use crate::graph::{DirectedEdge, Graph, NodeId};
use crate::reinforcement::{ReinforcementScheme, WeightState};
use crate::rng::{stream_rng, SimRng};

/// Slack for comparing probabilities computed along different routes.
const PROB_EPS: f64 = 1e-12;

/// Upper bound on lazy Bernoulli draws when deciding domination.
const MAX_LAZY_DRAWS: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct CouplingConfig {
    pub a: f64,
    /// Degree bound K used in the Y' law; must be at least the maximal degree.
    pub k: usize,
    pub path: Vec<DirectedEdge>,
    pub replicates: usize,
    /// Episodes not decided after this many steps are censored.
    pub max_steps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingReport {
    pub episodes: u64,
    /// Episodes on which D_γ occurred.
    pub on_path_event: u64,
    /// D_γ episodes with Q(f) ≤ Q̄(f) at every interior vertex.
    pub dominated: u64,
    pub censored: u64,
    /// First visits to interior vertices while D_γ was still possible.
    pub first_visits: u64,
    pub first_exit_back: u64,
    pub y0_prime_ones: u64,
    /// P[Y'_0 = 1] = (1+a)/(1+Ka).
    pub y0_prime_prob: f64,
}

impl CouplingReport {
    /// Fraction of D_γ episodes where domination held.
    pub fn fraction(&self) -> Option<f64> {
        (self.on_path_event > 0).then(|| self.dominated as f64 / self.on_path_event as f64)
    }

    fn merge(&mut self, o: &CouplingReport) {
        self.episodes += o.episodes;
        self.on_path_event += o.on_path_event;
        self.dominated += o.dominated;
        self.censored += o.censored;
        self.first_visits += o.first_visits;
        self.first_exit_back += o.first_exit_back;
        self.y0_prime_ones += o.y0_prime_ones;
    }
}

/// Coupling phase of one interior vertex.
#[derive(Debug, Clone, PartialEq)]
enum Phase {
    Unvisited,
    /// Y'_0 = 0 and e unused: draws Y'_{n-1} on the n-th visit.
    Lower { draws: Vec<bool> },
    /// Y'_0 = 0 but e was used anyway: Q ≤ 1 ≤ M̄_f whatever happens next.
    LowerSettled { draws: Vec<bool> },
    /// Y'_0 = 1: draws Y_{n-1} on the n-th use of e or f.
    Upper { uses: u64, draws: Vec<bool> },
}

#[derive(Debug, Clone)]
struct Vertex {
    node: NodeId,
    f: DirectedEdge,
    e: DirectedEdge,
    /// Edge through which the node must be entered first.
    entry: DirectedEdge,
    visits: u64,
    dep_f: u64,
    dep_e: u64,
    phase: Phase,
}

impl Vertex {
    fn determined(&self) -> bool {
        self.dep_f > 0 && self.dep_e > 0
    }
}

enum Outcome {
    OffEvent,
    OnEvent(bool),
    Censored,
}

fn validate(graph: &Graph, cfg: &CouplingConfig) -> Result<()> {
    if !(cfg.a.is_finite() && cfg.a > 0.0) {
        return invalid(format!("initial weight must be positive, got {}", cfg.a));
    }
    if !graph.is_finite() {
        return invalid("coupling needs a finite graph");
    }
    if cfg.k < graph.degree_bound() {
        return invalid(format!("K = {} is below the maximal degree {}", cfg.k, graph.degree_bound()));
    }
    if cfg.path.len() < 2 {
        return invalid("path needs at least two edges");
    }
    let mut seen = vec![cfg.path[0].tail];
    for (i, g) in cfg.path.iter().enumerate() {
        if !graph.has_edge(g.tail, g.head) {
            return invalid(format!("{g:?} is not an edge"));
        }
        if i > 0 && cfg.path[i - 1].head != g.tail {
            return invalid("path edges must be consecutive");
        }
        if seen.contains(&g.head) {
            return invalid("path must be simple");
        }
        seen.push(g.head);
    }
    Ok(())
}

/// Picks a neighbour other than `skip` proportionally to edge weight, using
/// a uniform `u` in [0, 1).
fn pick_other(nbrs: &[NodeId], w: &[f64], skip: &[NodeId], u: f64) -> Result<NodeId> {
    let total: f64 = nbrs.iter().zip(w).filter(|(n, _)| !skip.contains(n)).map(|(_, x)| x).sum();
    if total <= 0.0 {
        return Err(Error::Internal("no edge left to choose".into()));
    }
    let mut t = u * total;
    let mut last = None;
    for (n, x) in nbrs.iter().zip(w) {
        if skip.contains(n) {
            continue;
        }
        last = Some(*n);
        if t < *x {
            return Ok(*n);
        }
        t -= x;
    }
    last.ok_or_else(|| Error::Internal("no edge left to choose".into()))
}

struct Episode<'a> {
    graph: &'a Graph,
    cfg: &'a CouplingConfig,
    weights: WeightState,
    pos: NodeId,
    vertices: Vec<Vertex>,
    /// Path edges already traversed in their own direction.
    forward_done: Vec<bool>,
    report: CouplingReport,
    nbrs: Vec<NodeId>,
    w: Vec<f64>,
}

impl<'a> Episode<'a> {
    fn new(graph: &'a Graph, cfg: &'a CouplingConfig) -> Result<Self> {
        let vertices = cfg
            .path
            .windows(2)
            .map(|p| Vertex {
                node: p[1].tail,
                f: p[1],
                e: p[0].reverse(),
                entry: p[0],
                visits: 0,
                dep_f: 0,
                dep_e: 0,
                phase: Phase::Unvisited,
            })
            .collect();
        Ok(Self {
            graph,
            cfg,
            weights: WeightState::new(ReinforcementScheme::linear(cfg.a, 1.0))?,
            pos: cfg.path[0].tail,
            vertices,
            forward_done: vec![false; cfg.path.len()],
            report: CouplingReport::default(),
            nbrs: Vec::new(),
            w: Vec::new(),
        })
    }

    fn load_weights(&mut self) -> Result<f64> {
        self.nbrs.clear();
        self.nbrs.extend_from_slice(&self.graph.neighbors(self.pos)?);
        self.w.clear();
        for &n in &self.nbrs {
            self.w.push(self.weights.weight_between(self.pos, n));
        }
        Ok(self.w.iter().sum())
    }

    fn weight_to(&self, n: NodeId) -> f64 {
        self.nbrs.iter().position(|&x| x == n).map_or(0.0, |i| self.w[i])
    }

    fn free_choice(&self, total: f64, rng: &mut SimRng) -> Result<NodeId> {
        debug_assert!(total > 0.0);
        pick_other(&self.nbrs, &self.w, &[], rng.random())
    }

    /// Shared-uniform choice of `target` with probability `p_true` against a
    /// Bernoulli(p_bound) with p_bound ≤ p_true. Returns (next, bernoulli).
    fn lower_coupled(&self, target: NodeId, p_true: f64, p_bound: f64, rng: &mut SimRng) -> Result<(NodeId, bool)> {
        if p_true + PROB_EPS < p_bound {
            return Err(Error::Internal(format!(
                "coupling bound violated at {}: P(e) = {p_true} < {p_bound}",
                self.pos
            )));
        }
        let u: f64 = rng.random();
        let y = u < p_bound;
        if u < p_true || y {
            return Ok((target, y));
        }
        let v = ((u - p_true) / (1.0 - p_true)).clamp(0.0, 1.0 - f64::EPSILON);
        Ok((pick_other(&self.nbrs, &self.w, &[target], v)?, y))
    }

    fn step(&mut self, rng: &mut SimRng) -> Result<()> {
        let total = self.load_weights()?;
        let idx = self.vertices.iter().position(|v| v.node == self.pos);
        let next = match idx {
            Some(i) if !self.vertices[i].determined() => self.coupled_step(i, total, rng)?,
            _ => self.free_choice(total, rng)?,
        };
        self.apply(DirectedEdge::new(self.pos, next));
        Ok(())
    }

    fn coupled_step(&mut self, i: usize, total: f64, rng: &mut SimRng) -> Result<NodeId> {
        let (a, k) = (self.cfg.a, self.cfg.k as f64);
        let (e, f) = (self.vertices[i].e, self.vertices[i].f);
        let n = self.vertices[i].visits;
        let phase = std::mem::replace(&mut self.vertices[i].phase, Phase::Unvisited);
        let (next, phase) = match phase {
            Phase::Unvisited => {
                if n != 1 {
                    return Err(Error::Internal(format!("vertex {} unvisited at visit {n}", self.pos)));
                }
                let p_true = self.weight_to(e.head) / total;
                let (next, y) = self.lower_coupled(e.head, p_true, (1.0 + a) / (1.0 + k * a), rng)?;
                self.report.first_visits += 1;
                self.report.first_exit_back += u64::from(next == e.head);
                self.report.y0_prime_ones += u64::from(y);
                let phase = match (y, next == e.head) {
                    (true, _) => Phase::Upper { uses: 1, draws: Vec::new() },
                    (false, true) => Phase::LowerSettled { draws: Vec::new() },
                    (false, false) => Phase::Lower { draws: Vec::new() },
                };
                (next, phase)
            }
            Phase::Lower { mut draws } => {
                let p_true = self.weight_to(e.head) / total;
                let p_bound = (1.0 + a) / (2.0 * n as f64 - 1.0 + k * a);
                let (next, y) = self.lower_coupled(e.head, p_true, p_bound, rng)?;
                draws.push(y);
                if next == e.head {
                    (next, Phase::LowerSettled { draws })
                } else {
                    (next, Phase::Lower { draws })
                }
            }
            Phase::LowerSettled { draws } => (self.free_choice(total, rng)?, Phase::LowerSettled { draws }),
            Phase::Upper { mut uses, mut draws } => {
                let (we, wf) = (self.weight_to(e.head), self.weight_to(f.head));
                let pair: f64 = rng.random();
                if pair >= (we + wf) / total {
                    let v: f64 = rng.random();
                    (pick_other(&self.nbrs, &self.w, &[e.head, f.head], v)?, Phase::Upper { uses, draws })
                } else {
                    uses += 1;
                    let p_f = wf / (we + wf);
                    let p_bound = a / (uses as f64 + 2.0 * a);
                    if p_f > p_bound + PROB_EPS {
                        return Err(Error::Internal(format!(
                            "coupling bound violated at {}: P(f | e or f) = {p_f} > {p_bound}",
                            self.pos
                        )));
                    }
                    let u: f64 = rng.random();
                    draws.push(u < p_bound);
                    let next = if u < p_f { f.head } else { e.head };
                    (next, Phase::Upper { uses, draws })
                }
            }
        };
        self.vertices[i].phase = phase;
        Ok(next)
    }

    fn apply(&mut self, d: DirectedEdge) {
        for v in &mut self.vertices {
            if v.node == d.tail && !v.determined() {
                if d == v.f {
                    v.dep_f += 1;
                } else if d == v.e {
                    v.dep_e += 1;
                }
            }
        }
        self.weights.record_traversal(d);
        self.pos = d.head;
        if let Some(v) = self.vertices.iter_mut().find(|v| v.node == d.head) {
            v.visits += 1;
        }
    }

    /// False once the history rules out D_γ.
    fn consistent(&mut self, d: DirectedEdge) -> bool {
        for (i, g) in self.cfg.path.iter().enumerate() {
            if d == *g {
                self.forward_done[i] = true;
            } else if d == g.reverse() && !self.forward_done[i] {
                return false;
            }
        }
        if let Some(v) = self.vertices.iter().find(|v| v.node == d.head) {
            if v.visits == 1 && d != v.entry {
                return false;
            }
        }
        true
    }

    fn run(&mut self, rng: &mut SimRng) -> Result<Outcome> {
        for _ in 0..self.cfg.max_steps {
            let from = self.pos;
            self.step(rng)?;
            if !self.consistent(DirectedEdge::new(from, self.pos)) {
                return Ok(Outcome::OffEvent);
            }
            if self.vertices.iter().all(Vertex::determined) {
                return Ok(Outcome::OnEvent(self.dominated(rng)?));
            }
        }
        Ok(Outcome::Censored)
    }

    /// Q(f) ≤ Q̄(f) at every interior vertex, drawing further Bernoulli
    /// variables only while the comparison is still open.
    fn dominated(&self, rng: &mut SimRng) -> Result<bool> {
        let (a, k) = (self.cfg.a, self.cfg.k as f64);
        for v in &self.vertices {
            let q = Ratio::new(v.dep_f, v.dep_e);
            let ok = match &v.phase {
                Phase::Lower { draws } | Phase::LowerSettled { draws } => {
                    // Q̄ = M̄_f = first j ≥ 1 with Y'_j = 1; stop once M̄_f ≥ j ≥ Q
                    let p = |j: usize| (1.0 + a) / (2.0 * j as f64 + 1.0 + k * a);
                    match first_success(draws, p, |lower| q <= Ratio::from_integer(lower), rng)? {
                        Some(m) => q <= Ratio::from_integer(m),
                        None => true,
                    }
                }
                Phase::Upper { draws, .. } => {
                    // Q̄ = 1 / M̄_e with M̄_e = first j ≥ 1 with Y_j = 1
                    let p = |j: usize| a / (j as f64 + 1.0 + 2.0 * a);
                    match first_success(draws, p, |_| false, rng)? {
                        Some(m) => q <= Ratio::new(1, m),
                        None => false,
                    }
                }
                Phase::Unvisited => {
                    return Err(Error::Internal(format!("vertex {} determined without a visit", v.node)));
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Index j ≥ 1 of the first success among `draws` = (Y_1, Y_2, …), extending
/// the sequence with fresh draws of law `p(j)`. Before drawing Y_j the first
/// success is known to be at least j; `stop(j)` ends the search early and
/// yields `None`.
fn first_success(
    draws: &[bool],
    p: impl Fn(usize) -> f64,
    stop: impl Fn(u64) -> bool,
    rng: &mut impl Rng,
) -> Result<Option<u64>> {
    if let Some(i) = draws.iter().position(|&y| y) {
        return Ok(Some(i as u64 + 1));
    }
    let mut j = draws.len() + 1;
    loop {
        if stop(j as u64) {
            return Ok(None);
        }
        if j > MAX_LAZY_DRAWS {
            return Err(Error::Internal("lazy Bernoulli draws did not decide domination".into()));
        }
        if rng.random::<f64>() < p(j) {
            return Ok(Some(j as u64));
        }
        j += 1;
    }
}

/// Runs `replicates` coupled episodes from the first vertex of the path.
pub fn coupling_domination_check(graph: &Graph, cfg: &CouplingConfig, exec: Execution) -> Result<CouplingReport> {
    validate(graph, cfg)?;
    let graph = Arc::new(graph.clone());
    let parts: Vec<Result<(CouplingReport, Outcome)>> = map_replicates(cfg.replicates, exec, |r| {
        let mut rng = stream_rng(cfg.seed, "coupling", r as u64);
        let mut ep = Episode::new(&graph, cfg)?;
        let out = ep.run(&mut rng)?;
        Ok((ep.report, out))
    });
    let mut report = CouplingReport { y0_prime_prob: (1.0 + cfg.a) / (1.0 + cfg.k as f64 * cfg.a), ..Default::default() };
    for part in parts {
        let (r, out) = part?;
        report.merge(&r);
        report.episodes += 1;
        match out {
            Outcome::OffEvent => {}
            Outcome::Censored => report.censored += 1,
            Outcome::OnEvent(ok) => {
                report.on_path_event += 1;
                report.dominated += u64::from(ok);
            }
        }
    }
    Ok(report)
}
