mod support {
    pub mod chain;
}

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use support::chain::{random_chain, Chain};
use vcot_core::model::{FEATURE_DIM, NUM_STATES};
use vcot_core::rm::net::kl_divergence;
use vcot_core::rm::*;
use vcot_core::seed::rng_for;

fn state_features(state: usize) -> [f64; FEATURE_DIM] {
    let mut z = [0.0; FEATURE_DIM];
    z[state] = 1.0;
    z[FEATURE_DIM - 1] = 1.0;
    z
}

/// Transitions whose successors follow `chain`, with the chain rows as
/// Markov targets and a reward that depends on the successor.
fn chain_dataset(chain: &Chain, n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = rng_for(&[seed, 0xda7a]);
    let rows: Vec<WeightedIndex<f64>> = chain.iter().map(|r| WeightedIndex::new(r).unwrap()).collect();
    (0..n)
        .map(|_| {
            let state = rng.random_range(0..NUM_STATES);
            let successor = rows[state].sample(&mut rng);
            Sample {
                z: state_features(state),
                successor,
                reward: successor as f64 / 6.0,
                weight: 1.0,
                prior: chain[state],
            }
        })
        .collect()
}

#[test]
fn loss_history_does_not_rise() {
    let data = chain_dataset(&random_chain(3), 2_000, 3);
    let out = train_samples(&data, &TrainConfig::default(), 3).unwrap();
    let h = &out.loss_history;
    assert_eq!(h.len(), 50);
    for w in h.windows(2) {
        assert!(w[1] <= w[0] * 1.05, "loss rose from {} to {}", w[0], w[1]);
    }
    assert!(h[h.len() - 1] < h[0]);
}

#[test]
fn policy_recovers_generating_chain() {
    let chain = random_chain(7);
    let data = chain_dataset(&chain, 4_000, 7);
    let out = train_samples(&data, &TrainConfig::default(), 7).unwrap();
    let mean_kl = (0..NUM_STATES)
        .map(|s| kl_divergence(&out.weights.forward(&state_features(s)).unwrap().policy, &chain[s]))
        .sum::<f64>()
        / NUM_STATES as f64;
    assert!(mean_kl < 0.05, "mean KL {mean_kl}");
}

#[test]
fn training_is_deterministic() {
    let data = chain_dataset(&random_chain(1), 500, 1);
    let cfg = TrainConfig {
        epochs: 5,
        hidden: 16,
        ..Default::default()
    };
    let a = train_samples(&data, &cfg, 11).unwrap();
    let b = train_samples(&data, &cfg, 11).unwrap();
    assert_eq!(a, b);
    let c = train_samples(&data, &cfg, 12).unwrap();
    assert_ne!(a.weights, c.weights);
}

#[test]
fn empty_inputs_rejected() {
    assert!(train_rm(&[], &TrainConfig::default(), 0).is_err());
    assert!(train_samples(&[], &TrainConfig::default(), 0).is_err());
    let data = chain_dataset(&random_chain(1), 10, 1);
    let bad = TrainConfig {
        lr: 0.0,
        ..Default::default()
    };
    assert!(train_samples(&data, &bad, 0).is_err());
}
