//! Trajectory- and image-level stopping rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{TransitionMatrix, WeakUnit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopThresholds {
    /// Context stabilisation distance.
    pub delta_s: f64,
    /// Step reward change.
    pub delta_r: f64,
    /// Change of mean episode reward.
    pub eps_r: f64,
    /// Frobenius change of the transition posterior.
    pub eps_p: f64,
    pub h_max: usize,
    pub e_max: usize,
}

impl Default for StopThresholds {
    fn default() -> Self {
        StopThresholds {
            delta_s: 0.02,
            delta_r: 1e-3,
            eps_r: 1e-3,
            eps_p: 1e-3,
            h_max: 7,
            e_max: 50,
        }
    }
}

impl StopThresholds {
    /// Tolerances must be finite and non-negative and `e_max` at least one.
    /// `h_max = 0` is allowed and means "detect only, never refine".
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_s", self.delta_s),
            ("delta_r", self.delta_r),
            ("eps_r", self.eps_r),
            ("eps_p", self.eps_p),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.e_max == 0 {
            return Err(Error::validation("e_max must be at least 1"));
        }
        Ok(())
    }

    /// Thresholds that never stop early: only the step and episode limits apply.
    pub fn limits_only(h_max: usize, e_max: usize) -> Self {
        StopThresholds {
            delta_s: 0.0,
            delta_r: 0.0,
            eps_r: 0.0,
            eps_p: 0.0,
            h_max,
            e_max,
        }
    }
}

/// Which trajectory rule fired, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajStop {
    ContextStable,
    RewardStable,
    StepLimit,
}

/// `t` is the number of steps taken so far.
pub fn traj_stop_reason(
    z_t: &WeakUnit,
    z_next: &WeakUnit,
    r_prev: f64,
    r_cur: f64,
    t: usize,
    thr: &StopThresholds,
) -> Option<TrajStop> {
    if z_t.context_distance(z_next) < thr.delta_s {
        Some(TrajStop::ContextStable)
    } else if (r_cur - r_prev).abs() < thr.delta_r {
        Some(TrajStop::RewardStable)
    } else if t >= thr.h_max {
        Some(TrajStop::StepLimit)
    } else {
        None
    }
}

pub fn traj_stop(z_t: &WeakUnit, z_next: &WeakUnit, r_prev: f64, r_cur: f64, t: usize, thr: &StopThresholds) -> bool {
    traj_stop_reason(z_t, z_next, r_prev, r_cur, t, thr).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageStop {
    RewardConverged,
    PosteriorConverged,
    EpisodeLimit,
}

pub fn frobenius_delta(a: &TransitionMatrix, b: &TransitionMatrix) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Change of the running mean episode reward caused by the latest episode,
/// `|r̄_k − r̄_{k−1}|`. `None` before the second episode.
pub fn mean_reward_increment(episode_rewards: &[f64]) -> Option<f64> {
    let k = episode_rewards.len();
    if k < 2 {
        return None;
    }
    let prev = episode_rewards[..k - 1].iter().sum::<f64>() / (k - 1) as f64;
    Some((episode_rewards[k - 1] - prev).abs() / k as f64)
}

/// `episode_rewards` holds the mean step reward of each completed episode
/// and `episode` counts completed episodes.
pub fn image_stop_reason(
    episode_rewards: &[f64],
    p_prev: &TransitionMatrix,
    p_cur: &TransitionMatrix,
    episode: usize,
    thr: &StopThresholds,
) -> Option<ImageStop> {
    let reward_delta = mean_reward_increment(episode_rewards);
    if reward_delta.is_some_and(|d| d < thr.eps_r) {
        Some(ImageStop::RewardConverged)
    } else if frobenius_delta(p_prev, p_cur) < thr.eps_p {
        Some(ImageStop::PosteriorConverged)
    } else if episode >= thr.e_max {
        Some(ImageStop::EpisodeLimit)
    } else {
        None
    }
}

pub fn image_stop(
    episode_rewards: &[f64],
    p_prev: &TransitionMatrix,
    p_cur: &TransitionMatrix,
    episode: usize,
    thr: &StopThresholds,
) -> bool {
    image_stop_reason(episode_rewards, p_prev, p_cur, episode, thr).is_some()
}
