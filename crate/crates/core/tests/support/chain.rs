#![allow(dead_code)]

//! Transition-estimator recovery against a known generating chain.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use vcot_core::bandit::DirichletCounts;
use vcot_core::model::{StateId, NUM_ACTIONS, NUM_STATES};
use vcot_core::seed::rng_for;

pub type Chain = [[f64; NUM_ACTIONS]; NUM_STATES];

pub fn random_chain(seed: u64) -> Chain {
    let mut rng = rng_for(&[seed, 0xc4a1]);
    let mut chain = [[0.0; NUM_ACTIONS]; NUM_STATES];
    for row in &mut chain {
        for p in row.iter_mut() {
            *p = rng.random_range(0.02..1.0);
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }
    chain
}

/// Feeds `n` transitions (source state uniform, successor from the chain)
/// through the estimator and returns the worst per-row total variation.
pub fn worst_tv(chain: &Chain, n: usize, seed: u64) -> f64 {
    let mut rng = rng_for(&[seed, 0x5a3b]);
    let rows: Vec<WeightedIndex<f64>> = chain.iter().map(|r| WeightedIndex::new(r).unwrap()).collect();
    let mut counts = DirichletCounts::new();
    for _ in 0..n {
        let from = rng.random_range(0..NUM_STATES);
        let to = rows[from].sample(&mut rng) + 1;
        counts
            .update(StateId::new(from as u8).unwrap(), StateId::new(to as u8).unwrap())
            .unwrap();
    }
    let post = counts.posterior();
    (0..NUM_STATES)
        .map(|i| 0.5 * (0..NUM_ACTIONS).map(|k| (post[i][k + 1] - chain[i][k]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
