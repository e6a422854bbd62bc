//! Offline training on sampled trajectories.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ImageRecord, NUM_ACTIONS};
use crate::seed::rng_for;

use super::net::{grad_f64, Layout, LossWeights, RmWeights, Sample, DEFAULT_HIDDEN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub loss: LossWeights,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub hidden: usize,
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossWeights::default(),
            epochs: 50,
            lr: 0.05,
            batch_size: 64,
            hidden: DEFAULT_HIDDEN,
            init_scale: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::validation("epochs, batch size and hidden width must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::validation(format!("learning rate must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

/// Distillation weights for one image: rewards min-max scaled into
/// `[0.1, 1]`; all ones when every reward is equal.
pub fn distill_weights(rewards: &[f64]) -> Vec<f64> {
    let lo = rewards.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![1.0; rewards.len()];
    }
    rewards.iter().map(|&r| 0.1 + 0.9 * (r - lo) / (hi - lo)).collect()
}

/// Flattens sampled records into training examples. The Markov target of a
/// transition is its image's posterior row for the source state, restricted
/// to the seven successors.
pub fn samples_from_records(records: &[ImageRecord]) -> Vec<Sample> {
    let mut out = Vec::new();
    for rec in records {
        let steps: Vec<_> = rec.trajectories.iter().flat_map(|t| &t.steps).collect();
        let rewards: Vec<f64> = steps.iter().map(|s| s.reward).collect();
        let weights = distill_weights(&rewards);
        for (s, w) in steps.iter().zip(weights) {
            let row = &rec.transition_posterior[s.z_from.state.index()];
            let mut prior = [0.0; NUM_ACTIONS];
            prior.copy_from_slice(&row[1..]);
            out.push(Sample {
                z: s.z_from.features,
                successor: s.action.index(),
                reward: s.reward,
                weight: w,
                prior,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub weights: RmWeights,
    /// Mean minibatch loss of each epoch.
    pub loss_history: Vec<f64>,
}

/// Small uniform initialisation in `[-scale, scale]`.
pub fn init_params(hidden: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(&[seed, 0x1417]);
    (0..Layout::new(hidden).len)
        .map(|_| rng.random_range(-scale..=scale))
        .collect()
}

pub fn train_samples(samples: &[Sample], cfg: &TrainConfig, seed: u64) -> Result<TrainOutput> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::validation("training set is empty"));
    }
    samples.iter().try_for_each(Sample::validate)?;
    let mut params = init_params(cfg.hidden, cfg.init_scale, seed);
    let mut rng = rng_for(&[seed, 0x5f1e]);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| samples[i].clone()));
            let (parts, g) = grad_f64(&params, cfg.hidden, &batch, &cfg.loss);
            for (p, gi) in params.iter_mut().zip(&g) {
                *p -= cfg.lr * gi;
            }
            total += parts.total();
            batches += 1;
        }
        let epoch_loss = total / batches as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        history.push(epoch_loss);
    }
    Ok(TrainOutput {
        weights: RmWeights::from_f64(cfg.hidden, &params)?,
        loss_history: history,
    })
}

/// Trains on a sampled dataset. Deterministic for a fixed seed.
pub fn train_rm(records: &[ImageRecord], cfg: &TrainConfig, seed: u64) -> Result<TrainOutput> {
    if records.is_empty() {
        return Err(Error::validation("dataset is empty"));
    }
    let samples = samples_from_records(records);
    if samples.is_empty() {
        return Err(Error::validation("dataset has no transitions"));
    }
    train_samples(&samples, cfg, seed)
}
