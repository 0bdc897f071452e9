mod common;

use common::gradcheck::{worst_of, Case, LOSSES, NETWORKS, OPS};

const TRIALS: usize = 100;
const TOLERANCE: f64 = 1e-4;

fn run(catalog: &[(&str, Case)], trials: usize, seed: u64) {
    let mut failures = Vec::new();
    for (i, &(name, case)) in catalog.iter().enumerate() {
        let (worst, kinks) = worst_of(case, seed + i as u64, trials).unwrap();
        if !(worst < TOLERANCE) || kinks > trials / 10 {
            failures.push(format!("{name}: {worst:.3e} ({kinks} kinks)"));
        }
    }
    assert!(failures.is_empty(), "relative error above {TOLERANCE} or too many kinks: {failures:?}");
}

#[test]
fn every_op_matches_finite_differences() {
    run(OPS, TRIALS, 11);
}

#[test]
fn every_loss_matches_finite_differences() {
    run(LOSSES, TRIALS, 23);
}

#[test]
fn networks_match_finite_differences() {
    run(NETWORKS, TRIALS, 37);
}
