//! Estimators and verification harnesses built on the simulation engines.

mod coupling;
mod ensemble;
mod ratio;
mod urn_limit;

use std::collections::BTreeMap;

use rand::Rng;

use crate::dynamics::{Trajectory, TrajectoryRecorder, RecordMode, WalkerSystem};
use crate::error::{Error, Result};

pub use coupling::{coupling_domination_check, CouplingConfig, CouplingReport};
pub use ensemble::{ensemble_table, EnsembleRow, EnsembleTable, ReplicateStats, WalkBias};
pub use ratio::{
    conductance_ratio_estimates, decay_probe, DecayConfig, DecayProbe, DistanceMean, RatioEstimate, RatioEstimator,
    RatioStatus,
};
pub use urn_limit::{limit_fraction_histogram, LimitFractionConfig, LimitFractionReport};

/// Mean and standard error of the mean. The standard error is 0 for fewer
/// than two samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Empirical law of the gaps between consecutive centre meetings.
#[derive(Debug, Clone, PartialEq)]
pub struct MeetingHistogram {
    /// gap length -> count
    pub counts: BTreeMap<u64, u64>,
    pub gaps: u64,
    pub mean_gap: f64,
}

impl MeetingHistogram {
    pub fn probability(&self, gap: u64) -> f64 {
        self.counts.get(&gap).copied().unwrap_or(0) as f64 / self.gaps as f64
    }
}

/// Histogram of τ_{n+1} − τ_n over all complete gaps in `episodes`.
pub fn meeting_time_histogram(episodes: &[Trajectory]) -> Result<MeetingHistogram> {
    let mut counts = BTreeMap::new();
    let (mut gaps, mut total) = (0u64, 0u64);
    for traj in episodes {
        let times = crate::dynamics::center_meeting_times(traj)?;
        for w in times.windows(2) {
            *counts.entry(w[1] - w[0]).or_insert(0) += 1;
            gaps += 1;
            total += w[1] - w[0];
        }
    }
    let mean_gap = if gaps == 0 { f64::NAN } else { total as f64 / gaps as f64 };
    Ok(MeetingHistogram { counts, gaps, mean_gap })
}

/// Steps a two-walker system until both walkers are back at 0, or until
/// `max_steps` steps have been made.
pub fn run_until_center_meeting<R: Rng + ?Sized>(
    sys: &mut WalkerSystem,
    rng: &mut R,
    max_steps: u64,
) -> Result<Trajectory> {
    if sys.positions().len() != 2 {
        return Err(Error::Usage("centre meetings need two walkers".into()));
    }
    let mut rec = TrajectoryRecorder::new(sys.positions(), 16, RecordMode::Full);
    for _ in 0..max_steps {
        rec.push(sys.step(rng));
        if sys.positions().iter().all(|&p| p == 0) {
            break;
        }
    }
    Ok(rec.finish())
}

/// Left-edge weight fraction w(−1,0)/(w(−1,0)+w(0,1)) on the three-node
/// segment at each of `times`, with unit reinforcement per traversal.
pub fn left_fraction_at(traj: &Trajectory, left0: f64, right0: f64, times: &[u64]) -> Result<Vec<f64>> {
    let records = traj
        .records()
        .ok_or_else(|| Error::Usage("fractions need full step records".into()))?;
    let (mut left, mut right) = (left0, right0);
    let mut out = Vec::with_capacity(times.len());
    let mut next = times.iter().peekable();
    for n in 0..=traj.steps() {
        if n > 0 {
            let r = &records[n as usize - 1];
            if r.from.min(r.to) == -1 {
                left += 1.0;
            } else {
                right += 1.0;
            }
        }
        while next.peek().is_some_and(|&&t| t == n) {
            out.push(left / (left + right));
            next.next();
        }
    }
    if next.peek().is_some() {
        return Err(Error::InvalidParameter("fraction times must be sorted and within the run".into()));
    }
    Ok(out)
}

/// Pooled one-step increments of fraction series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub mean: f64,
    pub se: f64,
    pub increments: usize,
}

impl Drift {
    /// |mean| < k·SE, with an exactly zero drift always accepted.
    pub fn within(&self, k: f64) -> bool {
        self.mean == 0.0 || self.mean.abs() < k * self.se
    }
}

pub const MIN_INCREMENTS: usize = 100;

pub fn martingale_drift(series: &[Vec<f64>]) -> Result<Drift> {
    let mut inc = Vec::new();
    for s in series {
        if s.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Domain("fractions must lie in [0, 1]".into()));
        }
        inc.extend(s.windows(2).map(|w| w[1] - w[0]));
    }
    if inc.len() < MIN_INCREMENTS {
        return Err(Error::InsufficientData(format!(
            "{} increments, need at least {MIN_INCREMENTS}",
            inc.len()
        )));
    }
    let (mean, se) = mean_se(&inc);
    Ok(Drift { mean, se, increments: inc.len() })
}
