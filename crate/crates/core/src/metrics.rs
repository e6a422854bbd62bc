//! Evaluation metrics for exploration strategies and model training.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ImageRecord, NUM_ACTIONS};

pub use crate::bandit::stop::frobenius_delta;

/// Mean reward of the best `K = max(1, floor(0.1 n))` trajectories, where a
/// trajectory's reward is its mean step reward. 0 for a record without
/// trajectories.
pub fn topk_at_stop(record: &ImageRecord) -> f64 {
    let mut rewards: Vec<f64> = record.trajectories.iter().map(|t| t.mean_reward()).collect();
    topk_mean(&mut rewards)
}

/// The same statistic over raw trajectory rewards (reordered in place).
pub fn topk_mean(rewards: &mut [f64]) -> f64 {
    if rewards.is_empty() {
        return 0.0;
    }
    let k = (rewards.len() / 10).max(1);
    rewards.sort_by(|a, b| b.total_cmp(a));
    rewards[..k].iter().sum::<f64>() / k as f64
}

/// Percentage of images where A has strictly higher Top-K at a budget no
/// larger than B's. Both sides must cover the same image ids.
pub fn pareto_win_rate(a: &[ImageRecord], b: &[ImageRecord]) -> Result<f64> {
    let mut a_sorted: Vec<&ImageRecord> = a.iter().collect();
    let mut b_sorted: Vec<&ImageRecord> = b.iter().collect();
    a_sorted.sort_by(|x, y| x.image_id.cmp(&y.image_id));
    b_sorted.sort_by(|x, y| x.image_id.cmp(&y.image_id));
    let ids = |v: &[&ImageRecord]| v.iter().map(|r| r.image_id.clone()).collect::<Vec<_>>();
    if ids(&a_sorted) != ids(&b_sorted) {
        return Err(Error::validation("pareto win rate needs the same image set on both sides"));
    }
    if a_sorted.is_empty() {
        return Err(Error::validation("pareto win rate over an empty image set"));
    }
    let wins = a_sorted
        .iter()
        .zip(&b_sorted)
        .filter(|(ra, rb)| topk_at_stop(ra) > topk_at_stop(rb) && ra.budget() <= rb.budget())
        .count();
    Ok(100.0 * wins as f64 / a_sorted.len() as f64)
}

/// Shannon entropy (nats) of the empirical action distribution. 0 when no
/// action was taken.
pub fn action_entropy(counts: &[u64; NUM_ACTIONS]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    // A single action gives -0.0.
    h.abs()
}

/// Sample standard deviation of the last 20% of the loss history (at least
/// two entries). 0 for histories shorter than two.
pub fn rm_loss_std(history: &[f64]) -> f64 {
    if history.len() < 2 {
        return 0.0;
    }
    let tail_len = ((history.len() as f64 * 0.2).ceil() as usize).max(2);
    sample_std(&history[history.len() - tail_len..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Bessel-corrected standard deviation; 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// One row of the exploration report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub topk_mean: f64,
    pub topk_std: f64,
    /// Pareto-win rate against the random baseline.
    pub pwr: f64,
    /// Entropy of the actions the strategy selected while sampling.
    pub entropy: f64,
    pub budget_mean: f64,
}

/// Line-oriented text table of a report.
pub fn render_table(rows: &[StrategySummary]) -> String {
    let mut out = format!(
        "{:<10} {:>10} {:>10} {:>8} {:>8} {:>11}\n",
        "strategy", "topk_mean", "topk_std", "pwr", "entropy", "budget_mean"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<10} {:>10.4} {:>10.4} {:>8.2} {:>8.4} {:>11.2}\n",
            r.strategy, r.topk_mean, r.topk_std, r.pwr, r.entropy, r.budget_mean
        ));
    }
    out
}
