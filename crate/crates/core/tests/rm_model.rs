mod support {
    pub mod grad_check;
}

use proptest::prelude::*;
use support::grad_check::{random_batch, worst_relative_error, TOLERANCE};
use vcot_core::bandit::arms::argmax_first;
use vcot_core::model::{FEATURE_DIM, NUM_ACTIONS};
use vcot_core::rm::infer::decision_scores;
use vcot_core::rm::net::{kl_divergence, rm_grad_f64, rm_loss_f64, DEFAULT_HIDDEN};
use vcot_core::rm::train::init_params;
use vcot_core::rm::*;

const UNIFORM: [f64; NUM_ACTIONS] = [1.0 / 7.0; NUM_ACTIONS];

fn features(v: f64) -> [f64; FEATURE_DIM] {
    let mut z = [v; FEATURE_DIM];
    z[FEATURE_DIM - 1] = 1.0;
    z
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let lw = LossWeights::default();
    for seed in 0..3 {
        for b in 0..3 {
            let batch = random_batch(seed, b, 16);
            for scale in [0.1, 0.5] {
                let err = worst_relative_error(DEFAULT_HIDDEN, scale, seed, &batch, &lw);
                assert!(err < TOLERANCE, "seed {seed} batch {b} scale {scale}: {err:e}");
            }
        }
    }
}

#[test]
fn loss_terms_vanish_at_their_targets() {
    let w = RmWeights::zeros(DEFAULT_HIDDEN);
    let sample = Sample {
        z: features(0.2),
        successor: 2,
        reward: 0.5,
        weight: 1.0,
        prior: UNIFORM,
    };
    let parts = rm_loss(&w, &[sample], &LossWeights { beta: 1.0, gamma: 1.0 }).unwrap();
    assert_eq!(parts.markov, 0.0);
    assert_eq!(parts.reward, 0.0);
    assert!((parts.distill - 7f64.ln()).abs() < 1e-12);
    assert!((7f64.ln() - 1.9459).abs() < 1e-4);
}

#[test]
fn loss_decomposes_additively() {
    let batch = random_batch(4, 0, 32);
    let p = init_params(DEFAULT_HIDDEN, 0.3, 4);
    let at = |beta, gamma| rm_loss_f64(&p, DEFAULT_HIDDEN, &batch, &LossWeights { beta, gamma }).unwrap();
    let pure = at(0.0, 0.0);
    assert_eq!(pure.total(), pure.distill);
    let with_reward = at(2.0, 0.0);
    let mse = at(1.0, 0.0).reward;
    assert!((with_reward.total() - (pure.distill + 2.0 * mse)).abs() < 1e-12);
    let full = at(2.0, 0.5);
    assert!(full.markov > 0.0);
    assert!((full.total() - (pure.distill + 2.0 * mse + full.markov)).abs() < 1e-12);
}

#[test]
fn duplicated_batch_has_the_same_gradient() {
    let batch = random_batch(1, 1, 12);
    let doubled: Vec<_> = batch.iter().chain(&batch).cloned().collect();
    let p = init_params(DEFAULT_HIDDEN, 0.1, 1);
    let lw = LossWeights::default();
    let g1 = rm_grad_f64(&p, DEFAULT_HIDDEN, &batch, &lw).unwrap();
    let g2 = rm_grad_f64(&p, DEFAULT_HIDDEN, &doubled, &lw).unwrap();
    for (a, b) in g1.iter().zip(&g2) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn absent_actions_share_policy_bias_gradient() {
    // Zero weights, a batch whose targets are only actions 0 and 3.
    let w = RmWeights::zeros(DEFAULT_HIDDEN);
    let mk = |successor| Sample {
        z: features(0.4),
        successor,
        reward: 0.7,
        weight: 1.0,
        prior: UNIFORM,
    };
    let g = rm_grad(&w, &[mk(0), mk(3), mk(3)], &LossWeights::default()).unwrap();
    let bp = g.len() - 1 - DEFAULT_HIDDEN - NUM_ACTIONS;
    let bias = &g[bp..bp + NUM_ACTIONS];
    for k in [1, 2, 4, 5, 6] {
        assert_eq!(bias[k], bias[1]);
    }
    assert!(bias[3] < bias[0] && bias[0] < bias[1]);
}

#[test]
fn zero_prior_rejected() {
    let mut prior = UNIFORM;
    prior[4] = 0.0;
    let s = Sample {
        z: features(0.0),
        successor: 1,
        reward: 0.5,
        weight: 1.0,
        prior,
    };
    assert!(rm_loss(&RmWeights::zeros(8), &[s], &LossWeights::default()).is_err());
}

proptest! {
    #[test]
    fn policy_is_a_distribution(seed in any::<u64>(), z in prop::array::uniform20(-5.0f64..5.0)) {
        let w = RmWeights::from_f64(16, &init_params(16, 1.0, seed)).unwrap();
        let out = w.forward(&z).unwrap();
        prop_assert!(out.policy.iter().all(|&p| p > 0.0));
        prop_assert!((out.policy.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        prop_assert!((0.0..=1.0).contains(&out.reward));
        prop_assert_eq!(out, w.forward(&z).unwrap());
    }

    #[test]
    fn kl_is_non_negative(a in prop::array::uniform7(0.01f64..1.0), b in prop::array::uniform7(0.01f64..1.0)) {
        let norm = |v: [f64; 7]| { let s: f64 = v.iter().sum(); v.map(|x| x / s) };
        let (p, q) = (norm(a), norm(b));
        prop_assert!(kl_divergence(&p, &q) >= 0.0);
        prop_assert_eq!(kl_divergence(&p, &p), 0.0);
    }

    #[test]
    fn hybrid_argmax_shift_invariant(
        policy in prop::array::uniform7(0.01f64..1.0),
        rewards in prop::array::uniform7(0.0f64..1.0),
        alpha in 0.0f64..=1.0,
        shift in -100.0f64..100.0,
    ) {
        let total: f64 = policy.iter().sum();
        let policy = policy.map(|p| p / total);
        let scores = decision_scores(&policy, &rewards, InferMode::Hybrid { alpha });
        let best = argmax_first(&scores);
        // Rounding of the shift can only reorder near-ties.
        let runner_up = scores.iter().enumerate().filter(|&(i, _)| i != best).map(|(_, &s)| s).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(scores[best] - runner_up > 1e-9);
        prop_assert_eq!(best, argmax_first(&scores.map(|s| s + shift)));
    }
}
