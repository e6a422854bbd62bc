//! One refinement episode: detect, then repeatedly pick an operator, apply
//! it, re-detect and score, until a trajectory stopping rule fires.
//! Shared by bandit sampling and model-guided inference.

use crate::actions::{apply_action, ActionConfig, ActionOutcome, Lexicon};
use crate::bandit::stop::{traj_stop_reason, StopThresholds, TrajStop};
use crate::env::{step_reward, DetectorPort};
use crate::error::{Error, Result};
use crate::model::{
    iou, make_weak_unit, normalized_entropy, ActionId, BoundingBox, DetectionResult, PromptState,
    StepDiagnostics, Trajectory, TrajectoryStep, VisualContext, WeakUnit,
};
use crate::raster::RasterImage;

/// Horizon used to normalise the step feature. Fixed so that features mean
/// the same thing whatever stopping limits a run uses.
pub const FEATURE_HORIZON: usize = 7;

/// Everything an episode needs to know about one image.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub image_id: &'a str,
    pub image: &'a RasterImage,
    pub noun: &'a str,
    /// Ground truth, when available, enables the overlap reward term.
    pub gt: Option<BoundingBox>,
    pub detector: &'a dyn DetectorPort,
    pub lexicon: &'a Lexicon,
    pub actions: &'a ActionConfig,
    pub w_gt: f64,
}

impl Env<'_> {
    pub fn initial_context(&self) -> Result<VisualContext> {
        let (w, h) = (self.image.width(), self.image.height());
        let full = BoundingBox::new(0.0, 0.0, f64::from(w), f64::from(h))?;
        VisualContext::new(self.image_id, w, h, full, PromptState::new(self.noun)?)
    }

    /// Reward for moving from detection `before` to `after`.
    pub fn reward(&self, before: &DetectionResult, after: &DetectionResult) -> f64 {
        let (sb, sa) = (before.top_scores(), after.top_scores());
        match (after.top_box(), self.gt.as_ref()) {
            (Some(pred), gt) => step_reward(pred, gt, sb, sa, self.w_gt),
            // nothing detected: no overlap with the ground truth
            (None, Some(_)) => (1.0 - self.w_gt.clamp(0.0, 1.0)) * crate::env::uncertainty_reduction(sb, sa),
            (None, None) => crate::env::uncertainty_reduction(sb, sa),
        }
    }
}

/// Decides the next operator and hears about every completed step.
pub trait Chooser {
    fn choose(&mut self, z: &WeakUnit, ctx: &VisualContext) -> ActionId;
    fn observe(&mut self, _step: &TrajectoryStep) {}
}

#[derive(Debug)]
pub struct Episode {
    pub trajectory: Trajectory,
    /// Detection on the noun-only prompt.
    pub initial: Option<DetectionResult>,
    /// Detection after the last completed step (the initial one if none).
    pub last: Option<DetectionResult>,
    pub outcomes: Vec<ActionOutcome>,
    pub stop: Option<TrajStop>,
    pub error: Option<Error>,
}

impl Episode {
    pub fn final_iou(&self, gt: &BoundingBox) -> f64 {
        self.last
            .as_ref()
            .and_then(|d| d.top_box())
            .map_or(0.0, |b| iou(b, gt))
    }

    pub fn actions(&self) -> Vec<ActionId> {
        self.trajectory.steps.iter().map(|s| s.action).collect()
    }
}

/// Runs one episode. The detector sees step 0 for the noun-only prompt and
/// step `t` after the `t`-th operator.
pub fn run_episode(env: &Env, thr: &StopThresholds, chooser: &mut impl Chooser) -> Episode {
    let mut ep = Episode {
        trajectory: Trajectory::default(),
        initial: None,
        last: None,
        outcomes: Vec::new(),
        stop: None,
        error: None,
    };
    let mut ctx = match env.initial_context() {
        Ok(c) => c,
        Err(e) => {
            ep.trajectory.aborted = true;
            ep.error = Some(e);
            return ep;
        }
    };
    let detect = |prompt: &PromptState, step: usize| env.detector.detect(env.image, prompt, step as u64);
    match detect(&ctx.prompt, 0) {
        Ok(d) => {
            ep.initial = Some(d.clone());
            ep.last = Some(d.clone());
            ctx.observe(d);
        }
        Err(e) => {
            ep.trajectory.aborted = true;
            ep.error = Some(e);
            return ep;
        }
    }

    let mut last: Option<ActionId> = None;
    let mut r_prev = 0.0;
    let mut t = 0;
    loop {
        if t >= thr.h_max {
            ep.stop = Some(TrajStop::StepLimit);
            break;
        }
        let z = make_weak_unit(&ctx, last, FEATURE_HORIZON);
        let action = chooser.choose(&z, &ctx);
        let (mut next, outcome) = apply_action(&ctx, action, env.image, env.lexicon, env.actions);
        let det = match detect(&next.prompt, t + 1) {
            Ok(d) => d,
            Err(e) => {
                ep.trajectory.aborted = true;
                ep.error = Some(e);
                break;
            }
        };
        let before = ctx.detection.as_ref().expect("context observed a detection");
        let reward = env.reward(before, &det);
        let diagnostics = StepDiagnostics {
            max_before: before.max_score(),
            max_after: det.max_score(),
            entropy_before: normalized_entropy(before.top_scores()),
            entropy_after: normalized_entropy(det.top_scores()),
        };
        ep.last = Some(det.clone());
        next.observe(det);
        let z_next = make_weak_unit(&next, Some(action), FEATURE_HORIZON);
        t += 1;
        let stop = traj_stop_reason(&z, &z_next, r_prev, reward, t, thr);
        let step = TrajectoryStep {
            z_from: z,
            action,
            z_to: z_next,
            reward,
            diagnostics,
        };
        chooser.observe(&step);
        ep.trajectory.steps.push(step);
        ep.outcomes.push(outcome);
        if stop.is_some() {
            ep.stop = stop;
            break;
        }
        r_prev = reward;
        ctx = next;
        last = Some(action);
    }
    ep
}

/// Applies a fixed action sequence (stopping early only on the step limit or
/// detector failure). Used for operator-set ablations.
pub struct FixedSequence {
    actions: Vec<ActionId>,
    next: usize,
}

impl FixedSequence {
    pub fn new(actions: Vec<ActionId>) -> Self {
        FixedSequence { actions, next: 0 }
    }
}

impl Chooser for FixedSequence {
    fn choose(&mut self, _z: &WeakUnit, _ctx: &VisualContext) -> ActionId {
        let a = self.actions[self.next % self.actions.len()];
        self.next += 1;
        a
    }
}

/// Runs `actions` in order with only the step limit active; an empty list
/// gives the detector's baseline output.
pub fn run_sequence(env: &Env, actions: &[ActionId]) -> Episode {
    let thr = StopThresholds::limits_only(actions.len(), 1);
    run_episode(env, &thr, &mut FixedSequence::new(actions.to_vec()))
}
