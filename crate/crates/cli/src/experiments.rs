//! One runner per experiment kind. Each returns a [`Table`] whose columns are
//! fixed by the kind; `docs/csv.md` lists them.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use rwalks_core::dynamics::{run_with, BiasRule, RecordMode, Scheduler, WalkerSystem};
use rwalks_core::ensemble::{map_replicates, Execution};
use rwalks_core::env::{
    classify_additive_bias, effective_resistance, sample_environment, solomon_drift, speed_additive_bias,
    walk_in_environment, EnvironmentLaw, Recurrence, ResistanceOutcome, SeriesRules,
};
use rwalks_core::ode::{flow_time, integrate, integrate_batch, simulate_triangle, SimplexPoint};
use rwalks_core::reinforcement::ReinforcementScheme;
use rwalks_core::rng::stream_rng;
use rwalks_core::stats::{
    coupling_domination_check, decay_probe, ensemble_table, ks_statistic, limit_fraction_histogram,
    CouplingConfig, DecayConfig, LimitFractionConfig, WalkBias,
};
use rwalks_core::urns::{polya_limit_params, ReplacementRule, Urn};
use rwalks_core::{DirectedEdge, Graph, GraphSpec};

use crate::config::{ExperimentConfig, Kind, Params, SchedulerChoice};
use crate::output::{push_replicate_group, Cell, Table};

/// Step size of the ODE integrations used as references.
const ODE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub full: bool,
    pub exec: Execution,
    /// Replaces the config seed when set.
    pub seed: Option<u64>,
}

fn header(extra: &[&str]) -> Table {
    Table::new(["experiment", "row", "replicate"].iter().chain(extra).copied())
}

fn scheduler(choice: SchedulerChoice, k: usize) -> Scheduler {
    match choice {
        SchedulerChoice::Uniform => Scheduler::UniformRandom(k),
        SchedulerChoice::Alternating => Scheduler::Alternating,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
    run_inner(cfg, opts).with_context(|| format!("experiment `{}` ({})", cfg.name, cfg.kind))
}

/// Runs the experiment and writes its CSV into `out_dir`.
pub fn write_experiment(cfg: &ExperimentConfig, opts: &RunOptions, out_dir: &Path) -> Result<PathBuf> {
    let table = run_experiment(cfg, opts)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join(&cfg.output);
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    table.write_csv(std::io::BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn run_inner(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
    let (steps, reps) = cfg.scale(opts.full);
    let seed = opts.seed.unwrap_or(cfg.seed);
    let exec = opts.exec;
    let id = cfg.name.as_str();
    let tag = cfg.kind.name();
    match &cfg.params {
        &Params::TwoPlayerUrn { a, b, delta, scheduler: sch, bins } => {
            let mut t = header(&[
                "a", "b", "delta", "scheduler", "steps", "beta_alpha", "beta_beta", "ks_fit", "left_fraction",
            ]);
            let lf = LimitFractionConfig {
                walkers: 2,
                scheduler: scheduler(sch, 2),
                left_weight: a,
                right_weight: b,
                delta,
                steps,
                replicates: reps,
                bins,
                seed,
            };
            let rep = limit_fraction_histogram(&lf, exec)?;
            let (fa, fb) = rep.beta_fit.map_or((f64::NAN, f64::NAN), |p| (p.alpha, p.beta));
            let fixed = [
                a.into(),
                b.into(),
                delta.into(),
                sch.to_string().into(),
                steps.into(),
                fa.into(),
                fb.into(),
                rep.ks_fit.unwrap_or(f64::NAN).into(),
            ];
            let stats: Vec<Vec<f64>> = rep.fractions.iter().map(|&x| vec![x]).collect();
            push_replicate_group(&mut t, id, &fixed, &stats);
            Ok(t)
        }
        &Params::MultiWalkerLine { k, scheduler: sch, a, delta } => {
            let mut t = header(&[
                "k", "scheduler", "a", "delta", "steps", "recurrent_walkers", "all_or_none", "min_position",
                "max_position",
            ]);
            let graph = Arc::new(Graph::build(&GraphSpec::IntegerLine)?);
            let sched = if k == 1 { Scheduler::Single } else { scheduler(sch, k) };
            let proto = WalkerSystem::edge(
                graph,
                ReinforcementScheme::linear(a, delta),
                BiasRule::NoBias,
                sched,
                vec![0; k],
            )?;
            let stats = map_replicates(reps, exec, |r| {
                let mut rng = stream_rng(seed, tag, r as u64);
                let traj = run_with(&mut proto.clone(), steps, &mut rng, RecordMode::SummaryOnly);
                let recurrent = (0..k).filter(|&m| traj.revisits_origin_in_final_half(m)).count();
                let lo = traj.walkers().iter().map(|w| w.min).min().unwrap_or(0);
                let hi = traj.walkers().iter().map(|w| w.max).max().unwrap_or(0);
                vec![recurrent as f64, f64::from(u8::from(recurrent == 0 || recurrent == k)), lo as f64, hi as f64]
            });
            let fixed = [k.into(), sch.to_string().into(), a.into(), delta.into(), steps.into()];
            push_replicate_group(&mut t, id, &fixed, &stats);
            Ok(t)
        }
        Params::LambdaStarLine { lambdas } => speed_table(id, WalkBias::Multiplicative, lambdas, reps, steps, seed, exec),
        Params::LambdaPlusLine { lambdas } => speed_table(id, WalkBias::Additive, lambdas, reps, steps, seed, exec),
        &Params::LambdaStarCycle { lambda, weights } => {
            let mut t = header(&[
                "lambda", "w1", "w2", "w3", "steps", "flow_time", "ode_c1", "ode_c2", "ode_c3", "c1", "c2", "c3",
                "l1_to_ode",
            ]);
            let total: f64 = weights.iter().sum();
            let time = flow_time(total, steps);
            let ode = integrate(&SimplexPoint::normalize(weights)?, lambda, time, ODE_STEP)?.final_point();
            let stats = map_replicates(reps, exec, |r| {
                let mut rng = stream_rng(seed, tag, r as u64);
                simulate_triangle(lambda, weights, steps, &mut rng).map(|p| {
                    let c = p.components();
                    vec![c[0], c[1], c[2], p.l1_distance(&ode)]
                })
            })
            .into_iter()
            .collect::<rwalks_core::Result<Vec<_>>>()?;
            let o = ode.components();
            let mut fixed: Vec<Cell> = vec![lambda.into()];
            fixed.extend(weights.iter().map(|&w| Cell::from(w)));
            fixed.extend([steps.into(), time.into(), o[0].into(), o[1].into(), o[2].into()]);
            push_replicate_group(&mut t, id, &fixed, &stats);
            Ok(t)
        }
        &Params::TransientEnv { lambda, radius } => {
            let mut t = header(&[
                "lambda", "radius", "r_eff", "tail_bound", "transient", "recurrent", "inconclusive",
            ]);
            let law = EnvironmentLaw::TransientInitial { lambda };
            let rules = SeriesRules::default();
            let r = radius as i64;
            let stats = map_replicates(reps, exec, |i| {
                let mut rng = stream_rng(seed, tag, i as u64);
                let env = sample_environment(law, -r, r, &mut rng)?;
                let out = effective_resistance(&env, radius, &rules);
                let tail = match out {
                    ResistanceOutcome::Value { tail_bound, .. }
                    | ResistanceOutcome::DivergedLeft { tail_bound, .. }
                    | ResistanceOutcome::DivergedRight { tail_bound, .. } => tail_bound,
                    ResistanceOutcome::DivergedBoth => 0.0,
                    ResistanceOutcome::Inconclusive { .. } => f64::NAN,
                };
                let flag = |b: Option<bool>| f64::from(u8::from(b.unwrap_or(false)));
                Ok(vec![
                    out.r_eff().unwrap_or(f64::NAN),
                    tail,
                    flag(out.is_recurrent().map(|x| !x)),
                    flag(out.is_recurrent()),
                    f64::from(u8::from(out.is_recurrent().is_none())),
                ])
            })
            .into_iter()
            .collect::<rwalks_core::Result<Vec<_>>>()?;
            push_replicate_group(&mut t, id, &[lambda.into(), radius.into()], &stats);
            Ok(t)
        }
        &Params::Polya { white, black, delta } => {
            let mut t = header(&["white", "black", "delta", "steps", "beta_alpha", "beta_beta", "ks", "white_fraction"]);
            let limit = polya_limit_params(white, black, delta)?;
            let proto = Urn::new(white, black, ReplacementRule::Polya { delta })?;
            let fractions = map_replicates(reps, exec, |r| {
                let mut rng = stream_rng(seed, tag, r as u64);
                let mut urn = proto.clone();
                for _ in 0..steps {
                    urn.draw(&mut rng);
                }
                urn.white_fraction()
            });
            let ks = if fractions.is_empty() { f64::NAN } else { ks_statistic(&fractions, |x| limit.cdf(x)) };
            let fixed = [
                white.into(),
                black.into(),
                delta.into(),
                steps.into(),
                limit.alpha.into(),
                limit.beta.into(),
                ks.into(),
            ];
            let stats: Vec<Vec<f64>> = fractions.into_iter().map(|x| vec![x]).collect();
            push_replicate_group(&mut t, id, &fixed, &stats);
            Ok(t)
        }
        Params::ReinforcedUrn { white, black, white_law, black_law, laws } => {
            let mut t = header(&["white0", "black0", "laws", "steps", "white_fraction", "white", "black"]);
            let rule = ReplacementRule::Random { black: black_law.clone(), white: white_law.clone() };
            let proto = Urn::new(*white, *black, rule)?;
            let stats = map_replicates(reps, exec, |r| {
                let mut rng = stream_rng(seed, tag, r as u64);
                let mut urn = proto.clone();
                for _ in 0..steps {
                    urn.draw(&mut rng);
                }
                vec![urn.white_fraction(), urn.white(), urn.black()]
            });
            let fixed = [(*white).into(), (*black).into(), laws.as_str().into(), steps.into()];
            push_replicate_group(&mut t, id, &fixed, &stats);
            Ok(t)
        }
        Params::RwreAnalysis { lambdas } => {
            let mut t = header(&[
                "lambda", "steps", "drift", "drift_error", "recurrent", "speed_formula", "speed",
            ]);
            for (i, &lambda) in lambdas.iter().enumerate() {
                let drift = solomon_drift(lambda)?;
                let recurrent = classify_additive_bias(lambda)? == Recurrence::Recurrent;
                let law = EnvironmentLaw::AdditiveBias { lambda };
                let stats = map_replicates(reps, exec, |r| {
                    let mut rng = stream_rng(seed, tag, ((i as u64) << 32) | r as u64);
                    let mut env = sample_environment(law, 0, 1, &mut rng)?;
                    let traj = walk_in_environment(&mut env, 0, steps, &mut rng, RecordMode::SummaryOnly)?;
                    Ok(vec![traj.walkers()[0].position as f64 / steps as f64])
                })
                .into_iter()
                .collect::<rwalks_core::Result<Vec<_>>>()?;
                let fixed = [
                    lambda.into(),
                    steps.into(),
                    drift.value.into(),
                    drift.abs_error.into(),
                    recurrent.into(),
                    speed_additive_bias(lambda).into(),
                ];
                push_replicate_group(&mut t, id, &fixed, &stats);
            }
            Ok(t)
        }
        Params::OdeTriangle { lambda, starts, horizon, step, record_every } => {
            let mut t = Table::new([
                "experiment", "row", "start", "lambda", "max_correction", "accuracy_warning", "t", "c1", "c2", "c3",
                "dist_uniform",
            ]);
            let points = starts.iter().map(|&s| SimplexPoint::normalize(s)).collect::<rwalks_core::Result<Vec<_>>>()?;
            let trajs = integrate_batch(&points, *lambda, *horizon, *step, exec);
            let uniform = SimplexPoint::uniform();
            for (i, traj) in trajs.into_iter().enumerate() {
                let traj = traj.with_context(|| format!("start {i}"))?;
                let mut next_mark = 0.0;
                let last = traj.points.len() - 1;
                for (j, (time, p)) in traj.points.iter().enumerate() {
                    // marks are compared with a small slack so that a step
                    // landing a rounding error short of the mark still counts
                    if *time + 1e-9 < next_mark && j != last {
                        continue;
                    }
                    next_mark = (((*time + 1e-9) / record_every).floor() + 1.0) * record_every;
                    let c = p.components();
                    t.push(vec![
                        id.into(),
                        "point".into(),
                        i.into(),
                        (*lambda).into(),
                        traj.max_correction.into(),
                        traj.accuracy_warning.into(),
                        (*time).into(),
                        c[0].into(),
                        c[1].into(),
                        c[2].into(),
                        p.max_distance(&uniform).into(),
                    ]);
                }
            }
            Ok(t)
        }
        &Params::CouplingCheck { a, k_bound, path_len } => {
            let mut t = header(&[
                "a", "k_bound", "path_len", "max_steps", "on_path_event", "dominated", "censored", "fraction",
                "first_visits", "first_exit_back", "y0_prime_ones", "y0_prime_prob",
            ]);
            let len = path_len as i64;
            let graph = Graph::build(&GraphSpec::Segment { left: -len, right: 2 * len })?;
            let path = (0..len).map(|i| DirectedEdge::new(i, i + 1)).collect();
            let cc = CouplingConfig { a, k: k_bound, path, replicates: reps, max_steps: steps, seed };
            let rep = coupling_domination_check(&graph, &cc, exec)?;
            t.push(vec![
                id.into(),
                "aggregate".into(),
                rep.episodes.into(),
                a.into(),
                k_bound.into(),
                path_len.into(),
                steps.into(),
                rep.on_path_event.into(),
                rep.dominated.into(),
                rep.censored.into(),
                rep.fraction().unwrap_or(f64::NAN).into(),
                rep.first_visits.into(),
                rep.first_exit_back.into(),
                rep.y0_prime_ones.into(),
                rep.y0_prime_prob.into(),
            ]);
            Ok(t)
        }
        &Params::DecayProbe { a, s, radius, min_count, bootstrap } => {
            let mut t = Table::new([
                "experiment", "row", "distance", "a", "s", "radius", "steps", "replicates", "mean", "count",
                "pending", "slope", "ci_low", "ci_high",
            ]);
            let graph = Graph::build(&GraphSpec::IntegerLine)?;
            let dc = DecayConfig { a, s, radius, steps, replicates: reps, min_count, bootstrap, seed };
            let probe = decay_probe(&graph, 0, &dc, exec)?;
            let slope = probe.slope.unwrap_or(f64::NAN);
            let (lo, hi) = probe.ci.unwrap_or((f64::NAN, f64::NAN));
            for m in &probe.per_distance {
                t.push(vec![
                    id.into(),
                    "distance".into(),
                    m.distance.into(),
                    a.into(),
                    s.into(),
                    radius.into(),
                    steps.into(),
                    reps.into(),
                    m.mean.into(),
                    m.count.into(),
                    m.pending.into(),
                    slope.into(),
                    lo.into(),
                    hi.into(),
                ]);
            }
            Ok(t)
        }
    }
}

fn speed_table(
    id: &str,
    bias: WalkBias,
    lambdas: &[f64],
    reps: usize,
    steps: u64,
    seed: u64,
    exec: Execution,
) -> Result<Table> {
    let additive = bias == WalkBias::Additive;
    let mut cols = vec!["lambda", "steps"];
    if additive {
        cols.push("speed_formula");
    }
    cols.extend(["speed", "last_visit_fraction"]);
    let mut t = header(&cols);
    if reps == 0 {
        return Ok(t);
    }
    let table = ensemble_table(bias, lambdas, reps, steps, seed, exec)?;
    for row in &table.rows {
        let mut fixed: Vec<Cell> = vec![row.lambda.into(), steps.into()];
        if additive {
            fixed.push(speed_additive_bias(row.lambda).into());
        }
        let stats: Vec<Vec<f64>> = row.replicates.iter().map(|r| vec![r.speed, r.last_visit_fraction]).collect();
        push_replicate_group(&mut t, id, &fixed, &stats);
    }
    Ok(t)
}

/// `(kind, description)` for every supported kind.
pub fn kinds() -> impl Iterator<Item = (&'static str, &'static str)> {
    Kind::ALL.into_iter().map(|k| (k.name(), k.description()))
}

#[cfg(test)]
mod tests;
