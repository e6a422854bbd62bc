//! Per-(state, action) reward statistics and the selection rules over them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActionId, StateId, NUM_ACTIONS, NUM_STATES};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArmStats {
    mean: [[f64; NUM_ACTIONS]; NUM_STATES],
    count: [[u64; NUM_ACTIONS]; NUM_STATES],
}

impl ArmStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Incremental mean update `μ += (r - μ) / n`.
    pub fn update(&mut self, state: StateId, action: ActionId, reward: f64) {
        let (s, a) = (state.index(), action.index());
        self.count[s][a] += 1;
        self.mean[s][a] += (reward - self.mean[s][a]) / self.count[s][a] as f64;
    }

    /// Mean reward; 0 for an arm never pulled.
    pub fn mean(&self, state: StateId, action: ActionId) -> f64 {
        self.mean[state.index()][action.index()]
    }

    pub fn count(&self, state: StateId, action: ActionId) -> u64 {
        self.count[state.index()][action.index()]
    }

    /// Total pulls from `state`.
    pub fn visits(&self, state: StateId) -> u64 {
        self.count[state.index()].iter().sum()
    }
}

pub fn ucb_bonus(t: u64, n: u64, lambda: f64) -> f64 {
    let t = t.max(2) as f64;
    lambda * (t.ln() / (1.0 + n as f64)).sqrt()
}

pub fn ucb_score(stats: &ArmStats, state: StateId, action: ActionId, t: u64, lambda: f64) -> f64 {
    stats.mean(state, action) + ucb_bonus(t, stats.count(state, action), lambda)
}

/// Index of the largest value; the first one wins ties.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn ucb_select(stats: &ArmStats, state: StateId, t: u64, lambda: f64) -> ActionId {
    let q: Vec<f64> = ActionId::ALL
        .iter()
        .map(|&a| ucb_score(stats, state, a, t, lambda))
        .collect();
    ActionId::ALL[argmax_first(&q)]
}

/// The UCB exploration policy: an arm never pulled from `state` is played
/// first (lowest index), after which the index rule of `ucb_select` takes
/// over. With `lambda == 0` this is plain exploitation.
pub fn ucb_policy_select(stats: &ArmStats, state: StateId, t: u64, lambda: f64) -> ActionId {
    if lambda > 0.0 {
        if let Some(&a) = ActionId::ALL.iter().find(|&&a| stats.count(state, a) == 0) {
            return a;
        }
    }
    ucb_select(stats, state, t, lambda)
}

pub fn greedy_select(stats: &ArmStats, state: StateId) -> ActionId {
    let q: Vec<f64> = ActionId::ALL.iter().map(|&a| stats.mean(state, a)).collect();
    ActionId::ALL[argmax_first(&q)]
}

pub fn random_action<R: Rng + ?Sized>(rng: &mut R) -> ActionId {
    ActionId::ALL[rng.random_range(0..NUM_ACTIONS)]
}

/// Exploration strategy used while sampling trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Ucb { lambda: f64 },
    Random,
    Greedy,
    EpsGreedy { eps: f64 },
}

impl Policy {
    pub const DEFAULT_LAMBDA: f64 = 1.0;
    pub const DEFAULT_EPS: f64 = 0.1;

    /// Parses `ucb`, `random`, `greedy` or `eps` (also `eps-greedy`).
    pub fn parse(name: &str, lambda: f64) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "ucb" => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Error::validation(format!("lambda must be finite and >= 0, got {lambda}")));
                }
                Ok(Policy::Ucb { lambda })
            }
            "random" => Ok(Policy::Random),
            "greedy" | "greedy-q" => Ok(Policy::Greedy),
            "eps" | "eps-greedy" | "eps_greedy" => Ok(Policy::EpsGreedy { eps: Self::DEFAULT_EPS }),
            other => Err(Error::validation(format!(
                "unknown policy {other:?} (expected ucb, random, greedy or eps)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Ucb { .. } => "ucb",
            Policy::Random => "random",
            Policy::Greedy => "greedy",
            Policy::EpsGreedy { .. } => "eps",
        }
    }

    /// Picks an action in `state` at step `t` of the current trajectory.
    pub fn select<R: Rng + ?Sized>(&self, stats: &ArmStats, state: StateId, t: u64, rng: &mut R) -> ActionId {
        match *self {
            Policy::Ucb { lambda } => ucb_policy_select(stats, state, t, lambda),
            Policy::Random => random_action(rng),
            Policy::Greedy => greedy_select(stats, state),
            Policy::EpsGreedy { eps } => {
                if rng.random::<f64>() < eps {
                    random_action(rng)
                } else {
                    greedy_select(stats, state)
                }
            }
        }
    }
}
