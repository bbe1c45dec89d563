//! The ensemble driver against a direct transcription of the biased walk
//! kept in this file: a hash map of edge weights and one uniform draw per
//! step. The two use different random streams, so means are compared by
//! a two-sample z score.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;
use rwalks_core::ensemble::Execution;
use rwalks_core::stats::{ensemble_table, mean_se, WalkBias};

/// (X_n / n, last visit to 0 / n) for one walk; edge {z, z+1} is keyed by z.
fn naive(bias: WalkBias, lambda: f64, n: u64, rng: &mut Pcg64) -> (f64, f64) {
    let mut w: HashMap<i64, f64> = HashMap::new();
    let (mut x, mut last) = (0i64, 0u64);
    for t in 1..=n {
        let wr = *w.get(&x).unwrap_or(&1.0);
        let wl = *w.get(&(x - 1)).unwrap_or(&1.0);
        let right = match bias {
            WalkBias::Multiplicative => lambda * wr,
            WalkBias::Additive => lambda + wr,
        };
        if rng.random::<f64>() * (right + wl) < right {
            *w.entry(x).or_insert(1.0) += 1.0;
            x += 1;
        } else {
            *w.entry(x - 1).or_insert(1.0) += 1.0;
            x -= 1;
        }
        if x == 0 {
            last = t;
        }
    }
    (x as f64 / n as f64, last as f64 / n as f64)
}

fn z(a: (f64, f64), b: (f64, f64)) -> f64 {
    let se = (a.1 * a.1 + b.1 * b.1).sqrt();
    if se == 0.0 {
        (a.0 - b.0).abs() * f64::INFINITY
    } else {
        (a.0 - b.0).abs() / se
    }
}

fn compare(bias: WalkBias, lambdas: &[f64], reps: usize, steps: u64) {
    let table = ensemble_table(bias, lambdas, reps, steps, 17, Execution::default()).unwrap();
    let mut rng = Pcg64::seed_from_u64(99);
    for row in &table.rows {
        let runs: Vec<(f64, f64)> = (0..reps).map(|_| naive(bias, row.lambda, steps, &mut rng)).collect();
        let speed = mean_se(&runs.iter().map(|r| r.0).collect::<Vec<_>>());
        let last = mean_se(&runs.iter().map(|r| r.1).collect::<Vec<_>>());
        let zs = z((row.speed_mean, row.speed_se), speed);
        let zl = z((row.last_visit_mean, row.last_visit_se), last);
        assert!(zs < 4.0, "{bias:?} λ={}: speed {} vs naive {:?} (z {zs:.2})", row.lambda, row.speed_mean, speed);
        assert!(zl < 4.0, "{bias:?} λ={}: last visit {} vs naive {:?} (z {zl:.2})", row.lambda, row.last_visit_mean, last);
    }
}

#[test]
fn multiplicative_bias_matches_naive_walk() {
    compare(WalkBias::Multiplicative, &[1.0, 1.4, 1.8, 3.0], 400, 10_000);
}

#[test]
fn additive_bias_matches_naive_walk() {
    compare(WalkBias::Additive, &[0.5, 2.0, 5.0], 400, 10_000);
}

/// Reference point for the speed table: at λ = 1.8 and 10^4 steps the
/// direct walk moves at roughly 0.014 per step, well below 0.1.
#[test]
fn multiplicative_speed_scale_at_ten_thousand_steps() {
    let mut rng = Pcg64::seed_from_u64(3);
    let xs: Vec<f64> = (0..400).map(|_| naive(WalkBias::Multiplicative, 1.8, 10_000, &mut rng).0).collect();
    let (m, se) = mean_se(&xs);
    assert!(m > 0.0 && m < 0.05, "{m} ± {se}");
}
