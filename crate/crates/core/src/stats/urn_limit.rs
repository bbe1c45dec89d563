use std::sync::Arc;

use crate::dynamics::{BiasRule, Scheduler, WalkerSystem};
use crate::ensemble::{map_replicates, Execution};
use crate::error::{invalid, Result};
use crate::graph::{EdgeKey, Graph, GraphSpec};
use crate::reinforcement::{InitialWeights, ReinforcementScheme};
use crate::rng::stream_rng;
use crate::special::BetaParams;

use super::{ks_statistic, mean_se};

/// Walkers on the segment −1, 0, 1 started at 0, with linear reinforcement
/// of increment `delta` per traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitFractionConfig {
    /// 1 or 2
    pub walkers: usize,
    /// Used with two walkers.
    pub scheduler: Scheduler,
    pub left_weight: f64,
    pub right_weight: f64,
    pub delta: f64,
    pub steps: u64,
    pub replicates: usize,
    pub bins: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitFractionReport {
    /// Left-edge fraction at the horizon, one per replicate.
    pub fractions: Vec<f64>,
    /// Counts over `bins` equal-width bins of [0, 1].
    pub histogram: Vec<u64>,
    pub mean: f64,
    pub se: f64,
    /// Moment-matched Beta law; `None` when the sample variance is degenerate.
    pub beta_fit: Option<BetaParams>,
    /// KS distance to `beta_fit`.
    pub ks_fit: Option<f64>,
}

impl LimitFractionReport {
    pub fn ks_against(&self, law: &BetaParams) -> f64 {
        ks_statistic(&self.fractions, |x| law.cdf(x))
    }
}

pub fn limit_fraction_histogram(cfg: &LimitFractionConfig, exec: Execution) -> Result<LimitFractionReport> {
    let (scheduler, positions) = match cfg.walkers {
        1 => (Scheduler::Single, vec![0]),
        2 => (cfg.scheduler, vec![0, 0]),
        k => return invalid(format!("one or two walkers supported, got {k}")),
    };
    if cfg.bins == 0 {
        return invalid("histogram needs at least one bin");
    }
    let graph = Arc::new(Graph::build(&GraphSpec::Segment { left: -1, right: 1 })?);
    let (left, right) = (EdgeKey::new(-1, 0), EdgeKey::new(0, 1));
    let initial = InitialWeights::PerEdge {
        default: cfg.left_weight,
        values: [(left, cfg.left_weight), (right, cfg.right_weight)].into_iter().collect(),
    };
    let scheme = ReinforcementScheme::Linear { initial, delta: cfg.delta };
    let proto = WalkerSystem::edge(graph, scheme, BiasRule::NoBias, scheduler, positions)?;
    let fractions = map_replicates(cfg.replicates, exec, |r| {
        let mut sys = proto.clone();
        let mut rng = stream_rng(cfg.seed, "urn-limit", r as u64);
        for _ in 0..cfg.steps {
            sys.step(&mut rng);
        }
        let w = sys.weights().expect("edge reinforced");
        w.weight(left) / (w.weight(left) + w.weight(right))
    });
    let mut histogram = vec![0u64; cfg.bins];
    for &x in &fractions {
        histogram[((x * cfg.bins as f64) as usize).min(cfg.bins - 1)] += 1;
    }
    let (mean, se) = mean_se(&fractions);
    let var = se * se * fractions.len() as f64;
    let beta_fit = BetaParams::fit_moments(mean, var);
    let ks_fit = beta_fit.map(|b| ks_statistic(&fractions, |x| b.cdf(x)));
    Ok(LimitFractionReport { fractions, histogram, mean, se, beta_fit, ks_fit })
}
