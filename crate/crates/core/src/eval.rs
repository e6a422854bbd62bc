//! Batch drivers over scene sets: strategy comparison and model-guided
//! inference. Scenes run in parallel; results keep the scene order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionConfig, Lexicon};
use crate::bandit::{sample_image_detailed, Policy, SampleRun, SamplerConfig, StopThresholds};
use crate::env::World;
use crate::error::{Error, Result};
use crate::io::{load_ppm, SceneEntry};
use crate::metrics::{action_entropy, mean, pareto_win_rate, sample_std, topk_at_stop, StrategySummary};
use crate::model::{ImageRecord, NUM_ACTIONS};
use crate::rm::{run_inference, trace_episode, InferMode, InferenceTrace, RandomChooser, RmWeights};
use crate::seed::{hash_str, rng_for};

/// Shared inputs of every run over a scene set.
pub struct Bench<'a> {
    pub worlds: &'a [World],
    pub lexicon: &'a Lexicon,
    pub actions: &'a ActionConfig,
    pub w_gt: f64,
}

/// Builds the scenes, loading external images where given. `noise_seed`
/// selects the detector noise stream.
pub fn build_worlds(
    entries: &[SceneEntry],
    lexicon: &Lexicon,
    actions: &ActionConfig,
    noise_seed: u64,
) -> Result<Vec<World>> {
    entries
        .par_iter()
        .map(|e| match &e.image {
            Some(path) => World::with_image(e.spec.clone(), load_ppm(path)?, lexicon, actions, noise_seed),
            None => World::new(e.spec.clone(), lexicon, actions, noise_seed),
        })
        .collect()
}

impl Bench<'_> {
    pub fn sample(&self, cfg: &SamplerConfig, seed: u64) -> Vec<SampleRun> {
        self.worlds
            .par_iter()
            .map(|w| sample_image_detailed(&w.env(self.lexicon, self.actions, self.w_gt), cfg, seed))
            .collect()
    }

    pub fn infer(&self, weights: &RmWeights, mode: InferMode, thr: &StopThresholds) -> Vec<InferenceTrace> {
        self.worlds
            .par_iter()
            .map(|w| run_inference(&w.env(self.lexicon, self.actions, self.w_gt), weights, mode, thr))
            .collect()
    }

    /// Random operator choice under the same stopping rules.
    pub fn infer_random(&self, thr: &StopThresholds, seed: u64) -> Vec<InferenceTrace> {
        self.worlds
            .par_iter()
            .map(|w| {
                let mut chooser = RandomChooser(rng_for(&[seed, hash_str(&w.spec.image_id), 0x7a4d]));
                trace_episode(&w.env(self.lexicon, self.actions, self.w_gt), thr, &mut chooser)
            })
            .collect()
    }
}

/// Image ids must be unique for records to be matched across strategies.
pub fn check_unique_ids(worlds: &[World]) -> Result<()> {
    let mut ids: Vec<&str> = worlds.iter().map(|w| w.spec.image_id.as_str()).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|p| p[0] == p[1]) {
        Some(p) => Err(Error::validation(format!("duplicate image id {:?}", p[0]))),
        None => Ok(()),
    }
}

pub fn action_counts<'a>(records: impl IntoIterator<Item = &'a ImageRecord>) -> [u64; NUM_ACTIONS] {
    let mut counts = [0; NUM_ACTIONS];
    for r in records {
        for s in r.trajectories.iter().flat_map(|t| &t.steps) {
            counts[s.action.index()] += 1;
        }
    }
    counts
}

pub fn trace_action_counts(traces: &[InferenceTrace]) -> [u64; NUM_ACTIONS] {
    let mut counts = [0; NUM_ACTIONS];
    for a in traces.iter().flat_map(|t| &t.actions) {
        counts[a.index()] += 1;
    }
    counts
}

/// Summary row for one strategy; `reference` is the random baseline run on
/// the same images.
pub fn summarize(strategy: &str, records: &[ImageRecord], reference: &[ImageRecord]) -> Result<StrategySummary> {
    let topk: Vec<f64> = records.iter().map(topk_at_stop).collect();
    let budgets: Vec<f64> = records.iter().map(|r| r.budget() as f64).collect();
    Ok(StrategySummary {
        strategy: strategy.to_string(),
        topk_mean: mean(&topk),
        topk_std: sample_std(&topk),
        pwr: pareto_win_rate(records, reference)?,
        entropy: action_entropy(&action_counts(records)),
        budget_mean: mean(&budgets),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub rows: Vec<StrategySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub scenes: usize,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedReport>,
    /// Means over seeds; `topk_std` here is the spread of the per-seed means.
    pub summary: Vec<StrategySummary>,
}

/// Runs every strategy on every scene for one seed. Pareto-win rates are
/// against the random strategy, which is always run as the reference.
pub fn compare_strategies(
    entries: &[SceneEntry],
    lexicon: &Lexicon,
    actions: &ActionConfig,
    base: &SamplerConfig,
    strategies: &[Policy],
    seed: u64,
) -> Result<SeedReport> {
    let worlds = build_worlds(entries, lexicon, actions, seed)?;
    check_unique_ids(&worlds)?;
    let bench = Bench {
        worlds: &worlds,
        lexicon,
        actions,
        w_gt: base.w_gt,
    };
    let records = |policy: Policy| -> Vec<ImageRecord> {
        let cfg = SamplerConfig { policy, ..base.clone() };
        bench.sample(&cfg, seed).into_iter().map(|r| r.record).collect()
    };
    let reference = records(Policy::Random);
    let rows = strategies
        .iter()
        .map(|&p| {
            let recs = if p == Policy::Random { reference.clone() } else { records(p) };
            summarize(p.name(), &recs, &reference)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedReport { seed, rows })
}

pub fn eval_exploration(
    entries: &[SceneEntry],
    lexicon: &Lexicon,
    actions: &ActionConfig,
    base: &SamplerConfig,
    strategies: &[Policy],
    seeds: &[u64],
) -> Result<ExplorationReport> {
    if entries.is_empty() || strategies.is_empty() || seeds.is_empty() {
        return Err(Error::validation("need at least one scene, strategy and seed"));
    }
    let per_seed = seeds
        .iter()
        .map(|&s| compare_strategies(entries, lexicon, actions, base, strategies, s))
        .collect::<Result<Vec<_>>>()?;
    let summary = (0..strategies.len())
        .map(|i| {
            let col = |f: fn(&StrategySummary) -> f64| per_seed.iter().map(|r| f(&r.rows[i])).collect::<Vec<_>>();
            let topk = col(|r| r.topk_mean);
            StrategySummary {
                strategy: per_seed[0].rows[i].strategy.clone(),
                topk_mean: mean(&topk),
                topk_std: sample_std(&topk),
                pwr: mean(&col(|r| r.pwr)),
                entropy: mean(&col(|r| r.entropy)),
                budget_mean: mean(&col(|r| r.budget_mean)),
            }
        })
        .collect();
    Ok(ExplorationReport {
        scenes: entries.len(),
        seeds: seeds.to_vec(),
        per_seed,
        summary,
    })
}
