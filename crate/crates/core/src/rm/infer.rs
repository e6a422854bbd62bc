//! Model-guided operator selection and the inference loop.

use serde::{Deserialize, Serialize};

use crate::actions::apply_action;
use crate::bandit::arms::{argmax_first, random_action};
use crate::bandit::stop::{StopThresholds, TrajStop};
use crate::error::{Error, Result};
use crate::model::{iou, make_weak_unit, ActionId, DetectionResult, VisualContext, WeakUnit, NUM_ACTIONS};
use crate::rollout::{run_episode, Chooser, Env, FEATURE_HORIZON};

use super::net::{forward_f64, RmWeights};

/// Decision rule used at inference time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InferMode {
    Policy,
    Reward,
    Hybrid { alpha: f64 },
}

impl InferMode {
    pub const DEFAULT_ALPHA: f64 = 0.5;

    pub fn parse(name: &str, alpha: Option<f64>) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "policy" => Ok(InferMode::Policy),
            "reward" => Ok(InferMode::Reward),
            "hybrid" => {
                let alpha = alpha.unwrap_or(Self::DEFAULT_ALPHA);
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::validation(format!("alpha must lie in [0, 1], got {alpha}")));
                }
                Ok(InferMode::Hybrid { alpha })
            }
            other => Err(Error::validation(format!(
                "unknown mode {other:?} (expected policy, reward or hybrid)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InferMode::Policy => "policy",
            InferMode::Reward => "reward",
            InferMode::Hybrid { .. } => "hybrid",
        }
    }
}

/// Min-max normalisation; every value maps to 0.5 when all are equal.
pub fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.5; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Scores the decision rule assigns to the seven actions, given the policy
/// at `z_t` and the predicted reward of each candidate successor.
pub fn decision_scores(
    policy: &[f64; NUM_ACTIONS],
    candidate_rewards: &[f64; NUM_ACTIONS],
    mode: InferMode,
) -> [f64; NUM_ACTIONS] {
    let mut out = [0.0; NUM_ACTIONS];
    match mode {
        InferMode::Policy => out = *policy,
        InferMode::Reward => out = *candidate_rewards,
        InferMode::Hybrid { alpha } => {
            let norm = minmax_normalize(candidate_rewards);
            for k in 0..NUM_ACTIONS {
                out[k] = alpha * policy[k].ln() + (1.0 - alpha) * norm[k];
            }
        }
    }
    out
}

/// Picks the successor for `z_t`; `candidates[k]` is the weak unit reached
/// by action `k`. Ties go to the lowest action index.
pub fn infer_select(w: &RmWeights, z: &WeakUnit, candidates: &[WeakUnit; NUM_ACTIONS], mode: InferMode) -> ActionId {
    let p = w.to_f64();
    let policy = forward_f64(&p, w.hidden(), &z.features).policy;
    let mut rewards = [0.0; NUM_ACTIONS];
    if !matches!(mode, InferMode::Policy) {
        for (r, c) in rewards.iter_mut().zip(candidates) {
            *r = forward_f64(&p, w.hidden(), &c.features).reward;
        }
    }
    ActionId::ALL[argmax_first(&decision_scores(&policy, &rewards, mode))]
}

/// Successor weak units of `ctx`: each operator applied without a new
/// detection, so the candidates carry `ctx`'s latest detector output.
pub fn candidate_units(env: &Env, ctx: &VisualContext) -> [WeakUnit; NUM_ACTIONS] {
    ActionId::ALL.map(|a| {
        let (next, _) = apply_action(ctx, a, env.image, env.lexicon, env.actions);
        make_weak_unit(&next, Some(a), FEATURE_HORIZON)
    })
}

struct RmChooser<'a> {
    env: &'a Env<'a>,
    weights: &'a RmWeights,
    params: Vec<f64>,
    mode: InferMode,
}

impl Chooser for RmChooser<'_> {
    fn choose(&mut self, z: &WeakUnit, ctx: &VisualContext) -> ActionId {
        let hidden = self.weights.hidden();
        let policy = forward_f64(&self.params, hidden, &z.features).policy;
        let mut rewards = [0.0; NUM_ACTIONS];
        if !matches!(self.mode, InferMode::Policy) {
            let cands = candidate_units(self.env, ctx);
            for (r, c) in rewards.iter_mut().zip(&cands) {
                *r = forward_f64(&self.params, hidden, &c.features).reward;
            }
        }
        ActionId::ALL[argmax_first(&decision_scores(&policy, &rewards, self.mode))]
    }
}

/// The interpretable trace of one inference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceTrace {
    pub image_id: String,
    pub actions: Vec<ActionId>,
    pub rewards: Vec<f64>,
    /// Phrases written by each step (`None` for a skipped operator).
    pub phrases: Vec<Option<String>>,
    pub prompt: String,
    pub initial: Option<DetectionResult>,
    pub detection: Option<DetectionResult>,
    pub stop: Option<TrajStop>,
    pub error: Option<String>,
    /// Reward of the whole refinement, first detection to last.
    pub final_reward: Option<f64>,
    /// Overlap of the first and last top boxes with the ground truth.
    pub initial_iou: Option<f64>,
    pub final_iou: Option<f64>,
}

/// Replaces the bandit with the model's decision rule for a single episode.
pub fn run_inference(env: &Env, w: &RmWeights, mode: InferMode, thr: &StopThresholds) -> InferenceTrace {
    let mut chooser = RmChooser {
        env,
        weights: w,
        params: w.to_f64(),
        mode,
    };
    trace_episode(env, thr, &mut chooser)
}

/// Runs one episode with `chooser` and records it as an inference trace.
pub fn trace_episode(env: &Env, thr: &StopThresholds, chooser: &mut impl Chooser) -> InferenceTrace {
    let ep = run_episode(env, thr, chooser);
    let top_iou = |d: &Option<DetectionResult>| match (d.as_ref().and_then(|d| d.top_box()), env.gt.as_ref()) {
        (Some(b), Some(gt)) => Some(iou(b, gt)),
        (None, Some(_)) => Some(0.0),
        _ => None,
    };
    let final_reward = match (&ep.initial, &ep.last) {
        (Some(a), Some(b)) => Some(env.reward(a, b)),
        _ => None,
    };
    let (initial_iou, final_iou) = (top_iou(&ep.initial), top_iou(&ep.last));
    let mut prompt = crate::model::PromptState::new(env.noun).ok();
    for o in &ep.outcomes {
        if let (Some(p), crate::actions::ActionOutcome::Applied { slot, phrase }) = (prompt.as_mut(), o) {
            let _ = p.set(*slot, phrase.clone());
        }
    }
    InferenceTrace {
        image_id: env.image_id.to_string(),
        actions: ep.actions(),
        rewards: ep.trajectory.steps.iter().map(|s| s.reward).collect(),
        phrases: ep.outcomes.iter().map(|o| o.phrase().map(str::to_string)).collect(),
        prompt: prompt.map(|p| p.render()).unwrap_or_default(),
        initial: ep.initial,
        detection: ep.last,
        stop: ep.stop,
        error: ep.error.map(|e| e.to_string()),
        final_reward,
        initial_iou,
        final_iou,
    }
}

/// Uniformly random operator choice; the model-free inference baseline.
pub struct RandomChooser<R>(pub R);

impl<R: rand::Rng> Chooser for RandomChooser<R> {
    fn choose(&mut self, _z: &WeakUnit, _ctx: &VisualContext) -> ActionId {
        random_action(&mut self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hybrid_degenerates() {
        let policy = [0.1, 0.4, 0.1, 0.1, 0.1, 0.1, 0.1];
        let rewards = [0.9, 0.2, 0.3, 0.3, 0.3, 0.3, 0.3];
        let pick = |m| argmax_first(&decision_scores(&policy, &rewards, m));
        assert_eq!(pick(InferMode::Policy), 1);
        assert_eq!(pick(InferMode::Hybrid { alpha: 1.0 }), 1);
        assert_eq!(pick(InferMode::Reward), 0);
        assert_eq!(pick(InferMode::Hybrid { alpha: 0.0 }), 0);
    }

    #[test]
    fn equal_rewards_normalise_to_half() {
        assert_eq!(minmax_normalize(&[0.3; 4]), vec![0.5; 4]);
        assert_eq!(minmax_normalize(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn parse_modes() {
        assert_eq!(InferMode::parse("hybrid", None).unwrap(), InferMode::Hybrid { alpha: 0.5 });
        assert!(InferMode::parse("hybrid", Some(1.5)).is_err());
        assert!(InferMode::parse("beam", None).is_err());
    }
}
