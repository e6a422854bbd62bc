//! Per-image trajectory sampling: episodes until an image-level rule fires,
//! with arm statistics and transition counts carried across episodes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::ActionConfig;
use crate::env::DEFAULT_W_GT;
use crate::model::{ActionId, ImageRecord, TrajectoryStep, VisualContext, WeakUnit};
use crate::rollout::{run_episode, Chooser, Env};
use crate::seed::{hash_str, rng_for};

use super::arms::{ArmStats, Policy};
use super::dirichlet::DirichletCounts;
use super::stop::{image_stop_reason, ImageStop, StopThresholds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub policy: Policy,
    pub thresholds: StopThresholds,
    pub w_gt: f64,
    pub actions: ActionConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            policy: Policy::Ucb {
                lambda: Policy::DEFAULT_LAMBDA,
            },
            thresholds: StopThresholds::default(),
            w_gt: DEFAULT_W_GT,
            actions: ActionConfig::default(),
        }
    }
}

struct BanditChooser<'a, R: Rng> {
    policy: Policy,
    stats: &'a mut ArmStats,
    counts: &'a mut DirichletCounts,
    rng: &'a mut R,
}

impl<R: Rng> Chooser for BanditChooser<'_, R> {
    fn choose(&mut self, z: &WeakUnit, ctx: &VisualContext) -> ActionId {
        self.policy.select(self.stats, z.state, ctx.step as u64, self.rng)
    }

    fn observe(&mut self, step: &TrajectoryStep) {
        self.stats.update(step.z_from.state, step.action, step.reward);
        self.counts
            .update(step.z_from.state, step.z_to.state)
            .expect("successor of an action is never the initial state");
    }
}

/// Sampling output with the bookkeeping that is not part of the dataset.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub record: ImageRecord,
    pub stats: ArmStats,
    pub counts: DirichletCounts,
    pub stop: Option<ImageStop>,
    /// Detector errors that aborted episodes, in order.
    pub errors: Vec<String>,
}

pub fn sample_image_detailed(env: &Env, cfg: &SamplerConfig, seed: u64) -> SampleRun {
    let mut rng: ChaCha8Rng = rng_for(&[seed, hash_str(env.image_id), 0xba1d]);
    let mut stats = ArmStats::new();
    let mut counts = DirichletCounts::new();
    let mut episode_rewards = Vec::new();
    let mut trajectories = Vec::new();
    let mut errors = Vec::new();
    let mut stop = None;
    let thr = &cfg.thresholds;
    while stop.is_none() {
        let p_prev = counts.posterior();
        let ep = {
            let mut chooser = BanditChooser {
                policy: cfg.policy,
                stats: &mut stats,
                counts: &mut counts,
                rng: &mut rng,
            };
            run_episode(env, thr, &mut chooser)
        };
        if let Some(e) = &ep.error {
            errors.push(e.to_string());
        }
        episode_rewards.push(ep.trajectory.mean_reward());
        trajectories.push(ep.trajectory);
        stop = image_stop_reason(&episode_rewards, &p_prev, &counts.posterior(), trajectories.len(), thr);
    }
    SampleRun {
        record: ImageRecord {
            image_id: env.image_id.to_string(),
            trajectories,
            transition_posterior: counts.posterior(),
        },
        stats,
        counts,
        stop,
        errors,
    }
}

/// Samples trajectories for one image. Reproducible for a fixed seed.
pub fn sample_image(env: &Env, cfg: &SamplerConfig, seed: u64) -> ImageRecord {
    sample_image_detailed(env, cfg, seed).record
}
