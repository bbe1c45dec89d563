//! Trajectories and their summaries.

use std::collections::BTreeMap;

use crate::dense::SignedVec;
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Runs longer than this keep only the summary.
pub const FULL_RECORD_LIMIT: u64 = 10_000_000;

/// One move: at time `time` walker `walker` went from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepRecord {
    pub time: u64,
    pub walker: u32,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordMode {
    /// Full records up to [`FULL_RECORD_LIMIT`] steps, summary only above.
    Auto,
    Full,
    SummaryOnly,
}

/// Finite-horizon statistics of one walker. Visit counts include time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerSummary {
    pub start: NodeId,
    pub position: NodeId,
    pub max: NodeId,
    pub min: NodeId,
    pub moves: u64,
    /// Last time the walker was at node 0.
    pub last_visit_origin: Option<u64>,
    visits: SignedVec<u64>,
}

impl WalkerSummary {
    fn new(start: NodeId) -> Self {
        let mut visits = SignedVec::new(0);
        *visits.get_mut(start) += 1;
        Self {
            start,
            position: start,
            max: start,
            min: start,
            moves: 0,
            last_visit_origin: (start == 0).then_some(0),
            visits,
        }
    }

    #[inline]
    fn record(&mut self, time: u64, to: NodeId) {
        self.position = to;
        self.moves += 1;
        self.max = self.max.max(to);
        self.min = self.min.min(to);
        if to == 0 {
            self.last_visit_origin = Some(time);
        }
        *self.visits.get_mut(to) += 1;
    }

    pub fn visits(&self, v: NodeId) -> u64 {
        *self.visits.get(v)
    }

    pub fn visit_map(&self) -> BTreeMap<NodeId, u64> {
        self.visits.iter().filter(|(_, c)| **c > 0).map(|(v, c)| (v, *c)).collect()
    }
}

/// Output of a run: initial positions, optional step records and summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    initial: Vec<NodeId>,
    steps: u64,
    records: Option<Vec<StepRecord>>,
    walkers: Vec<WalkerSummary>,
}

/// Incremental construction of a [`Trajectory`].
#[derive(Debug, Clone)]
pub struct TrajectoryRecorder {
    traj: Trajectory,
}

impl TrajectoryRecorder {
    pub fn new(initial: &[NodeId], expected_steps: u64, mode: RecordMode) -> Self {
        let keep = match mode {
            RecordMode::Full => true,
            RecordMode::SummaryOnly => false,
            RecordMode::Auto => expected_steps <= FULL_RECORD_LIMIT,
        };
        let records = keep.then(|| Vec::with_capacity(expected_steps.min(FULL_RECORD_LIMIT) as usize));
        Self {
            traj: Trajectory {
                initial: initial.to_vec(),
                steps: 0,
                records,
                walkers: initial.iter().map(|&s| WalkerSummary::new(s)).collect(),
            },
        }
    }

    #[inline]
    pub fn push(&mut self, r: StepRecord) {
        self.traj.steps = r.time;
        self.traj.walkers[r.walker as usize].record(r.time, r.to);
        if let Some(v) = self.traj.records.as_mut() {
            v.push(r);
        }
    }

    pub fn finish(self) -> Trajectory {
        self.traj
    }
}

impl Trajectory {
    /// Rebuild a trajectory from records, checking that each record starts
    /// where its walker currently is and that times run 1, 2, ….
    pub fn from_records(initial: &[NodeId], records: Vec<StepRecord>) -> Result<Trajectory> {
        let mut rec = TrajectoryRecorder::new(initial, records.len() as u64, RecordMode::Full);
        let mut pos = initial.to_vec();
        for (i, r) in records.into_iter().enumerate() {
            let m = r.walker as usize;
            if r.time != i as u64 + 1 || m >= pos.len() || pos[m] != r.from {
                return Err(Error::InvalidParameter(format!("inconsistent step record {r:?}")));
            }
            pos[m] = r.to;
            rec.push(r);
        }
        Ok(rec.finish())
    }

    pub fn initial_positions(&self) -> &[NodeId] {
        &self.initial
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn walker_count(&self) -> usize {
        self.initial.len()
    }

    pub fn records(&self) -> Option<&[StepRecord]> {
        self.records.as_deref()
    }

    pub fn walkers(&self) -> &[WalkerSummary] {
        &self.walkers
    }

    pub fn final_positions(&self) -> Vec<NodeId> {
        self.walkers.iter().map(|w| w.position).collect()
    }

    /// Visits to `v` by all walkers, counting time 0.
    pub fn node_visits(&self, v: NodeId) -> u64 {
        self.walkers.iter().map(|w| w.visits(v)).sum()
    }

    /// Recompute the summary from the records and compare; `None` without records.
    pub fn summary_is_consistent(&self) -> Option<bool> {
        let records = self.records.as_ref()?;
        let rebuilt = Trajectory::from_records(&self.initial, records.clone()).ok()?;
        Some(rebuilt.walkers == self.walkers && rebuilt.steps == self.steps)
    }

    /// Call `f(n, positions)` for n = 0..=steps.
    pub fn for_each_time(&self, mut f: impl FnMut(u64, &[NodeId])) -> Result<()> {
        let records = self
            .records
            .as_ref()
            .ok_or_else(|| Error::Usage("trajectory keeps only a summary; rerun with full records".into()))?;
        let mut pos = self.initial.clone();
        f(0, &pos);
        for r in records {
            pos[r.walker as usize] = r.to;
            f(r.time, &pos);
        }
        Ok(())
    }

    /// Whether walker `m` was at 0 at some time after half the run.
    pub fn revisits_origin_in_final_half(&self, m: usize) -> bool {
        self.walkers[m].last_visit_origin.is_some_and(|t| 2 * t > self.steps)
    }
}

/// Per-walker range statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeReport {
    pub max: NodeId,
    pub min: NodeId,
    pub visits: BTreeMap<NodeId, u64>,
    pub last_visit_origin: Option<u64>,
}

pub fn range_report(traj: &Trajectory) -> Vec<RangeReport> {
    traj.walkers
        .iter()
        .map(|w| RangeReport { max: w.max, min: w.min, visits: w.visit_map(), last_visit_origin: w.last_visit_origin })
        .collect()
}

fn require_two(traj: &Trajectory) -> Result<()> {
    if traj.walker_count() != 2 {
        return Err(Error::Usage(format!("expected two walkers, got {}", traj.walker_count())));
    }
    Ok(())
}

/// τ_0 = 0 and the later times at which both walkers are at node 0.
pub fn center_meeting_times(traj: &Trajectory) -> Result<Vec<u64>> {
    require_two(traj)?;
    let mut out = vec![0];
    traj.for_each_time(|n, p| {
        if n > 0 && p[0] == 0 && p[1] == 0 {
            out.push(n);
        }
    })?;
    Ok(out)
}

/// All times n ≥ 0 at which the two walkers occupy the same node.
pub fn meeting_times(traj: &Trajectory) -> Result<Vec<u64>> {
    require_two(traj)?;
    let mut out = Vec::new();
    traj.for_each_time(|n, p| {
        if p[0] == p[1] {
            out.push(n);
        }
    })?;
    Ok(out)
}

/// Swap the walker labels on every interval (τ_i, τ_{i+1}] between
/// consecutive meetings with `bits[i-1]` set (ω_0 = 0; missing bits are 0).
pub fn label_exchange(traj: &Trajectory, bits: &[bool]) -> Result<Trajectory> {
    let meetings = meeting_times(traj)?;
    let records = traj.records().expect("meeting_times checked records");
    let mut next_meeting = 0usize;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        // Interval index i: number of meetings strictly before r.time.
        while next_meeting < meetings.len() && meetings[next_meeting] < r.time {
            next_meeting += 1;
        }
        let swap = next_meeting > 0 && bits.get(next_meeting - 1).copied().unwrap_or(false);
        out.push(StepRecord { walker: if swap { 1 - r.walker } else { r.walker }, ..*r });
    }
    Trajectory::from_records(traj.initial_positions(), out)
}
