//! Conductance-ratio estimates from departure counts.
//!
//! For a directed edge e = (u, w) let e' be the edge through which u was
//! first entered and f = reverse(e'). Both e and f leave u. M_e and M_f count
//! departures from u along e and f until both have been used; the one used
//! first carries the count, the other is 1. Q(e) = M_e / M_f estimates the
//! conductance ratio c_e / c_{e'}. Chaining Q along the path of first-entry
//! edges back to the start estimates c_e relative to the first edge.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Ratio;
use rand::RngExt;

use crate::dynamics::{run_with, RecordMode, Scheduler, Trajectory, WalkerSystem};
use crate::ensemble::{map_replicates, Execution};
use crate::error::{invalid, Error, Result};
use crate::graph::{DirectedEdge, EdgeKey, Graph, NodeId};
use crate::reinforcement::ReinforcementScheme;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioEstimate {
    pub edge: DirectedEdge,
    /// f, the reverse of the first-entry edge of the tail of `edge`.
    pub back: DirectedEdge,
    pub m_edge: u64,
    pub m_back: u64,
}

impl RatioEstimate {
    pub fn q(&self) -> Ratio<u64> {
        Ratio::new(self.m_edge, self.m_back)
    }

    pub fn ln_q(&self) -> f64 {
        (self.m_edge as f64).ln() - (self.m_back as f64).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioStatus {
    Determined(RatioEstimate),
    /// Not both edges were used before the end of the trajectory.
    Pending { edge: DirectedEdge, back: DirectedEdge },
}

impl RatioStatus {
    pub fn edge(&self) -> DirectedEdge {
        match self {
            RatioStatus::Determined(r) => r.edge,
            RatioStatus::Pending { edge, .. } => *edge,
        }
    }

    pub fn determined(&self) -> Option<&RatioEstimate> {
        match self {
            RatioStatus::Determined(r) => Some(r),
            RatioStatus::Pending { .. } => None,
        }
    }
}

/// First entries and departure sequences of a single-walker trajectory.
#[derive(Debug, Clone)]
pub struct RatioEstimator {
    start: NodeId,
    first_entry: HashMap<NodeId, DirectedEdge>,
    departures: HashMap<NodeId, Vec<NodeId>>,
    first_direction: HashMap<EdgeKey, DirectedEdge>,
}

impl RatioEstimator {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        if traj.walker_count() != 1 {
            return Err(Error::Usage("ratio estimates need a single walker".into()));
        }
        let records = traj
            .records()
            .ok_or_else(|| Error::Usage("ratio estimates need full step records".into()))?;
        let start = traj.initial_positions()[0];
        let mut first_entry = HashMap::new();
        let mut departures: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        let mut first_direction = HashMap::new();
        for r in records {
            let d = DirectedEdge::new(r.from, r.to);
            departures.entry(r.from).or_default().push(r.to);
            first_direction.entry(d.key()).or_insert(d);
            if r.to != start {
                first_entry.entry(r.to).or_insert(d);
            }
        }
        Ok(Self { start, first_entry, departures, first_direction })
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn first_entry(&self, v: NodeId) -> Option<DirectedEdge> {
        self.first_entry.get(&v).copied()
    }

    /// The direction in which the edge was traversed first.
    pub fn first_direction(&self, e: EdgeKey) -> Option<DirectedEdge> {
        self.first_direction.get(&e).copied()
    }

    /// `None` when the tail of `e` is the start or was never visited, or
    /// when its first-entry edge is the reverse of `e`.
    pub fn estimate(&self, e: DirectedEdge) -> Option<RatioStatus> {
        let entry = self.first_entry(e.tail)?;
        if entry == e.reverse() {
            return None;
        }
        let back = entry.reverse();
        let (mut m_edge, mut m_back) = (0u64, 0u64);
        for &to in self.departures.get(&e.tail).map(Vec::as_slice).unwrap_or(&[]) {
            if to == e.head {
                m_edge += 1;
            } else if to == back.head {
                m_back += 1;
            } else {
                continue;
            }
            if m_edge > 0 && m_back > 0 {
                // the edge used second contributes exactly one departure
                return Some(RatioStatus::Determined(RatioEstimate { edge: e, back, m_edge, m_back }));
            }
        }
        Some(RatioStatus::Pending { edge: e, back })
    }

    /// The path of first-entry edges from the start ending with `e`.
    pub fn path_to(&self, e: DirectedEdge) -> Option<Vec<DirectedEdge>> {
        let mut path = vec![e];
        let mut cur = e;
        while cur.tail != self.start {
            cur = self.first_entry(cur.tail)?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    /// Σ ln Q over the path to `e` without its first edge; `None` if the path
    /// is undefined or any factor is pending.
    pub fn path_log_estimate(&self, e: DirectedEdge) -> Option<f64> {
        let path = self.path_to(e)?;
        path[1..].iter().try_fold(0.0, |acc, g| match self.estimate(*g)? {
            RatioStatus::Determined(r) => Some(acc + r.ln_q()),
            RatioStatus::Pending { .. } => None,
        })
    }
}

/// Ratio estimates for every directed edge of `graph` leaving a visited
/// node other than `v0`, skipping edges whose tail was entered through
/// their reverse.
pub fn conductance_ratio_estimates(graph: &Graph, traj: &Trajectory, v0: NodeId) -> Result<Vec<RatioStatus>> {
    let est = RatioEstimator::from_trajectory(traj)?;
    if est.start() != v0 {
        return invalid(format!("trajectory starts at {}, not {v0}", est.start()));
    }
    let mut out = Vec::new();
    for u in graph.nodes() {
        if u == v0 || est.first_entry(u).is_none() {
            continue;
        }
        for &w in graph.neighbors(u)?.iter() {
            if let Some(s) = est.estimate(DirectedEdge::new(u, w)) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    /// Initial weight of the linearly reinforced walk.
    pub a: f64,
    pub s: f64,
    pub radius: u64,
    pub steps: u64,
    pub replicates: usize,
    /// Distances with fewer determined estimates are left out of the fit.
    pub min_count: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceMean {
    pub distance: u64,
    /// Mean of exp(s·Σ ln Q) over determined estimates.
    pub mean: f64,
    pub count: usize,
    pub pending: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayProbe {
    pub per_distance: Vec<DistanceMean>,
    /// Least-squares slope of ln(mean) against distance.
    pub slope: Option<f64>,
    /// 2.5% and 97.5% bootstrap quantiles of the slope.
    pub ci: Option<(f64, f64)>,
}

/// One replicate: (distance, estimate of c_e^s or pending) per edge.
type ReplicateValues = Vec<(u64, Option<f64>)>;

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn means_by_distance<'a>(reps: impl Iterator<Item = &'a ReplicateValues>, max_d: u64) -> Vec<(f64, usize, usize)> {
    let mut acc = vec![(0.0, 0usize, 0usize); max_d as usize + 1];
    for rep in reps {
        for &(d, v) in rep {
            let slot = &mut acc[d as usize];
            match v {
                Some(x) => {
                    slot.0 += x;
                    slot.1 += 1;
                }
                None => slot.2 += 1,
            }
        }
    }
    acc.into_iter().map(|(s, c, p)| (if c > 0 { s / c as f64 } else { f64::NAN }, c, p)).collect()
}

/// Per-distance means of the estimated c_e^s for the walk with initial weight
/// `a` on the ball of radius R around `v0`. Each undirected edge is estimated
/// in the direction it was first traversed.
pub fn decay_probe(graph: &Graph, v0: NodeId, cfg: &DecayConfig, exec: Execution) -> Result<DecayProbe> {
    if !(cfg.s > 0.0 && cfg.s < 0.25) {
        return invalid(format!("exponent s must lie in (0, 1/4), got {}", cfg.s));
    }
    if !(cfg.a.is_finite() && cfg.a > 0.0) {
        return invalid(format!("initial weight must be positive, got {}", cfg.a));
    }
    if cfg.radius == 0 || cfg.replicates == 0 {
        return Ok(DecayProbe { per_distance: Vec::new(), slope: None, ci: None });
    }
    let ball = Arc::new(graph.ball(v0, cfg.radius)?);
    let edges = ball.edges();
    if edges.is_empty() {
        return Ok(DecayProbe { per_distance: Vec::new(), slope: None, ci: None });
    }
    let distances: Vec<u64> = edges
        .iter()
        .map(|e| ball.distance_to_edge(v0, *e).map(|d| d.expect("ball is connected")))
        .collect::<Result<_>>()?;
    let max_d = *distances.iter().max().expect("nonempty");
    let proto = WalkerSystem::edge(
        ball.clone(),
        ReinforcementScheme::linear(cfg.a, 1.0),
        crate::dynamics::BiasRule::NoBias,
        Scheduler::Single,
        vec![v0],
    )?;
    let reps: Vec<Result<ReplicateValues>> = map_replicates(cfg.replicates, exec, |r| {
        let mut sys = proto.clone();
        let mut rng = stream_rng(cfg.seed, "decay", r as u64);
        let traj = run_with(&mut sys, cfg.steps, &mut rng, RecordMode::Full);
        let est = RatioEstimator::from_trajectory(&traj)?;
        Ok(edges
            .iter()
            .zip(&distances)
            .map(|(key, &d)| {
                let v = est
                    .first_direction(*key)
                    .and_then(|e| est.path_log_estimate(e))
                    .map(|l| (cfg.s * l).exp());
                (d, v)
            })
            .collect())
    });
    let reps: Vec<ReplicateValues> = reps.into_iter().collect::<Result<_>>()?;

    let summary = means_by_distance(reps.iter(), max_d);
    let per_distance: Vec<DistanceMean> = summary
        .iter()
        .enumerate()
        .map(|(d, &(mean, count, pending))| DistanceMean { distance: d as u64, mean, count, pending })
        .collect();
    let fitted: Vec<u64> = per_distance.iter().filter(|m| m.count >= cfg.min_count.max(1)).map(|m| m.distance).collect();
    let fit = |means: &[(f64, usize, usize)]| {
        let pts: Vec<(f64, f64)> = fitted
            .iter()
            .filter(|&&d| means[d as usize].1 > 0)
            .map(|&d| (d as f64, means[d as usize].0.ln()))
            .collect();
        slope(&pts)
    };
    let slope_hat = fit(&summary);

    let ci = if slope_hat.is_some() && cfg.bootstrap > 0 {
        let mut rng = stream_rng(cfg.seed, "decay/bootstrap", 0);
        let n = reps.len();
        let mut slopes: Vec<f64> = (0..cfg.bootstrap)
            .filter_map(|_| {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                fit(&means_by_distance(idx.iter().map(|&i| &reps[i]), max_d))
            })
            .collect();
        slopes.sort_by(f64::total_cmp);
        quantile_pair(&slopes)
    } else {
        None
    };
    Ok(DecayProbe { per_distance, slope: slope_hat, ci })
}

fn quantile_pair(sorted: &[f64]) -> Option<(f64, f64)> {
    if sorted.is_empty() {
        return None;
    }
    let q = |p: f64| sorted[((p * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1)];
    Some((q(0.025), q(0.975)))
}
