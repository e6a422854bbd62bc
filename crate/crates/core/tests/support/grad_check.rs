#![allow(dead_code)]

//! Central finite-difference oracle for the model gradient.

use rand::Rng;
use vcot_core::model::{FEATURE_DIM, NUM_ACTIONS};
use vcot_core::rm::net::{rm_grad_f64, rm_loss_f64, LossWeights, Sample};
use vcot_core::rm::train::init_params;
use vcot_core::seed::rng_for;

pub const STEP: f64 = 1e-4;
pub const TOLERANCE: f64 = 1e-4;

pub fn random_batch(seed: u64, batch: u64, size: usize) -> Vec<Sample> {
    let mut rng = rng_for(&[seed, batch, 0xba7c]);
    (0..size)
        .map(|_| {
            let mut z = [0.0; FEATURE_DIM];
            z[rng.random_range(0..8)] = 1.0;
            for v in &mut z[8..FEATURE_DIM - 1] {
                *v = rng.random::<f64>();
            }
            z[FEATURE_DIM - 1] = 1.0;
            let mut prior = [0.0; NUM_ACTIONS];
            for p in &mut prior {
                *p = rng.random_range(0.05..1.0);
            }
            let total: f64 = prior.iter().sum();
            prior.iter_mut().for_each(|p| *p /= total);
            Sample {
                z,
                successor: rng.random_range(0..NUM_ACTIONS),
                reward: rng.random(),
                weight: rng.random_range(0.1..=1.0),
                prior,
            }
        })
        .collect()
}

/// Largest `|analytic − numeric| / (|analytic| + 1e-8)` over every parameter
/// of a network initialised uniformly in `[-scale, scale]`.
pub fn worst_relative_error(hidden: usize, scale: f64, seed: u64, batch: &[Sample], lw: &LossWeights) -> f64 {
    let mut p = init_params(hidden, scale, seed);
    let analytic = rm_grad_f64(&p, hidden, batch, lw).unwrap();
    let loss = |p: &[f64]| rm_loss_f64(p, hidden, batch, lw).unwrap().total();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + STEP;
        let up = loss(&p);
        p[i] = orig - STEP;
        let down = loss(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        worst = worst.max((analytic[i] - numeric).abs() / (analytic[i].abs() + 1e-8));
    }
    worst
}
