use std::path::PathBuf;
use std::time::Instant;

use super::*;
use crate::config::parse_config;

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> ExperimentConfig {
    let text = fs::read_to_string(config_dir().join(name)).unwrap();
    parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn smoke(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.steps = cfg.steps.min(2_000);
    cfg.replicates = cfg.replicates.min(8);
    match &mut cfg.params {
        Params::OdeTriangle { horizon, step, .. } => {
            *horizon = horizon.min(5.0);
            *step = step.max(1e-2);
        }
        Params::DecayProbe { bootstrap, .. } => *bootstrap = (*bootstrap).min(50),
        Params::TransientEnv { radius, .. } => *radius = (*radius).min(100),
        _ => {}
    }
    cfg
}

fn all_configs() -> Vec<ExperimentConfig> {
    let mut names: Vec<String> = fs::read_dir(config_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".conf"))
        .collect();
    names.sort();
    names.iter().map(|n| load(n)).collect()
}

#[test]
fn every_kind_has_a_config_that_runs_quickly() {
    let configs = all_configs();
    let mut kinds: Vec<Kind> = configs.iter().map(|c| c.kind).collect();
    kinds.sort();
    kinds.dedup();
    assert_eq!(kinds, Kind::ALL.to_vec());
    let start = Instant::now();
    for cfg in configs {
        let t = run_experiment(&smoke(cfg.clone()), &RunOptions::default()).unwrap();
        assert!(!t.rows.is_empty(), "{}", cfg.name);
        assert!(t.rows.iter().all(|r| r.len() == t.header.len()));
        assert_eq!(t.header[0], "experiment");
        assert_eq!(t.header[1], "row");
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "{:?}", start.elapsed());
}

#[test]
fn reruns_are_byte_identical() {
    for cfg in all_configs() {
        let cfg = smoke(cfg);
        let a = run_experiment(&cfg, &RunOptions { exec: Execution::Sequential, ..Default::default() }).unwrap();
        let b = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(a.to_csv_bytes(), b.to_csv_bytes(), "{}", cfg.name);
    }
}

#[test]
fn seed_override_changes_random_output() {
    let cfg = smoke(load("polya.conf"));
    let base = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let same = run_experiment(&cfg, &RunOptions { seed: Some(cfg.seed), ..Default::default() }).unwrap();
    let other = run_experiment(&cfg, &RunOptions { seed: Some(cfg.seed + 1), ..Default::default() }).unwrap();
    assert_eq!(base, same);
    assert_ne!(base, other);
}

#[test]
fn polya_without_replicates_is_header_only() {
    let mut cfg = load("polya.conf");
    cfg.replicates = 0;
    let t = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert!(t.rows.is_empty());
    let csv = String::from_utf8(t.to_csv_bytes()).unwrap();
    assert_eq!(csv, "experiment,row,replicate,white,black,delta,steps,beta_alpha,beta_beta,ks,white_fraction\n");
    let mut star = load("lambda_star_line.conf");
    star.replicates = 0;
    assert!(run_experiment(&star, &RunOptions::default()).unwrap().rows.is_empty());
}

#[test]
fn replicate_and_aggregate_rows() {
    let mut cfg = smoke(load("lambda_star_line.conf"));
    cfg.params = Params::LambdaStarLine { lambdas: vec![1.0, 1.8] };
    let t = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(t.rows_of("replicate").count(), 2 * cfg.replicates);
    assert_eq!(t.rows_of("mean").count(), 2);
    assert_eq!(t.rows_of("stderr").count(), 2);
    let col = t.column("speed").unwrap();
    let speeds: Vec<f64> = t
        .rows_of("replicate")
        .take(cfg.replicates)
        .map(|r| match r[col] {
            Cell::Float(x) => x,
            _ => panic!(),
        })
        .collect();
    let mean = t.rows_of("mean").next().unwrap();
    let expected = speeds.iter().sum::<f64>() / speeds.len() as f64;
    assert!((t.float(mean, "speed").unwrap() - expected).abs() < 1e-15);
}

#[test]
fn ode_csv_has_trajectory_columns() {
    let cfg = load("ode_triangle.conf");
    let t = run_experiment(&cfg, &RunOptions::default()).unwrap();
    for c in ["t", "c1", "c2", "c3"] {
        assert!(t.column(c).is_some());
    }
    // three starts, marks every 0.5 up to 50 inclusive
    assert_eq!(t.rows.len(), 3 * 101);
    let first = &t.rows[0];
    assert_eq!(t.float(first, "t"), Some(0.0));
    assert_eq!(t.float(first, "c1"), Some(0.1));
    let last = &t.rows[100];
    assert!((t.float(last, "t").unwrap() - 50.0).abs() < 1e-9);
    assert!(t.float(last, "dist_uniform").unwrap() < 1e-3);
    for r in &t.rows {
        let s: f64 = ["c1", "c2", "c3"].iter().map(|c| t.float(r, c).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn write_experiment_creates_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke(load("multi_walker_line.conf"));
    let path = write_experiment(&cfg, &RunOptions::default(), &dir.path().join("nested")).unwrap();
    assert_eq!(path.file_name().unwrap(), "multi_walker_line.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("experiment,row,replicate,k,"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + cfg.replicates + 2);
}

#[test]
fn io_errors_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = smoke(load("polya.conf"));
    let err = write_experiment(&cfg, &RunOptions::default(), &blocker.join("sub")).unwrap_err();
    assert!(format!("{err:#}").contains("sub"), "{err:#}");
}

#[test]
fn inner_errors_carry_experiment_context() {
    let mut cfg = smoke(load("transient_env.conf"));
    // λ^x underflows the Beta parameters far to the left
    cfg.params = Params::TransientEnv { lambda: 1e-3, radius: 500 };
    let err = run_experiment(&cfg, &RunOptions::default()).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("transient-env") && msg.contains("range error"), "{msg}");
}

#[test]
fn kinds_are_listed() {
    assert_eq!(kinds().count(), 12);
}
