use std::sync::Arc;

use crate::dynamics::{run_with, BiasRule, RecordMode, Scheduler, WalkerSystem};
use crate::ensemble::{map_replicates, Execution};
use crate::error::{invalid, Result};
use crate::graph::{Graph, GraphSpec};
use crate::reinforcement::ReinforcementScheme;
use crate::rng::stream_rng;

use super::mean_se;

/// Which bias the λ grid is applied with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkBias {
    Multiplicative,
    Additive,
}

impl WalkBias {
    pub fn rule(self, lambda: f64) -> BiasRule {
        match self {
            WalkBias::Multiplicative => BiasRule::Multiplicative(lambda),
            WalkBias::Additive => BiasRule::Additive(lambda),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            WalkBias::Multiplicative => "ensemble/mult",
            WalkBias::Additive => "ensemble/add",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateStats {
    /// X_n / n
    pub speed: f64,
    /// last time at 0, divided by n
    pub last_visit_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRow {
    pub lambda: f64,
    pub replicates: Vec<ReplicateStats>,
    pub speed_mean: f64,
    pub speed_se: f64,
    pub last_visit_mean: f64,
    pub last_visit_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTable {
    pub bias: WalkBias,
    pub steps: u64,
    pub rows: Vec<EnsembleRow>,
}

/// Runs `replicates` biased linearly reinforced walks on ℤ from 0 (initial
/// weight 1, increment 1) for each λ in `lambdas`. Replicate r of the i-th λ
/// uses stream (seed, bias tag, i·2³² + r), so the table does not depend on
/// the execution mode.
pub fn ensemble_table(
    bias: WalkBias,
    lambdas: &[f64],
    replicates: usize,
    steps: u64,
    seed: u64,
    exec: Execution,
) -> Result<EnsembleTable> {
    if replicates == 0 || steps == 0 {
        return invalid("ensemble needs positive replicate and step counts");
    }
    let graph = Arc::new(Graph::build(&GraphSpec::IntegerLine)?);
    let mut rows = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let proto = WalkerSystem::edge(
            graph.clone(),
            ReinforcementScheme::linear(1.0, 1.0),
            bias.rule(lambda),
            Scheduler::Single,
            vec![0],
        )?;
        let reps = map_replicates(replicates, exec, |r| {
            let mut sys = proto.clone();
            let mut rng = stream_rng(seed, bias.tag(), ((i as u64) << 32) | r as u64);
            let traj = run_with(&mut sys, steps, &mut rng, RecordMode::SummaryOnly);
            let w = &traj.walkers()[0];
            ReplicateStats {
                speed: w.position as f64 / steps as f64,
                last_visit_fraction: w.last_visit_origin.unwrap_or(0) as f64 / steps as f64,
            }
        });
        let speeds: Vec<f64> = reps.iter().map(|r| r.speed).collect();
        let lasts: Vec<f64> = reps.iter().map(|r| r.last_visit_fraction).collect();
        let (speed_mean, speed_se) = mean_se(&speeds);
        let (last_visit_mean, last_visit_se) = mean_se(&lasts);
        rows.push(EnsembleRow { lambda, replicates: reps, speed_mean, speed_se, last_visit_mean, last_visit_se });
    }
    Ok(EnsembleTable { bias, steps, rows })
}
