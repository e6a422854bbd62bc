//! Step rewards: detector-confidence change and overlap with ground truth.

use crate::model::{iou, normalized_entropy, BoundingBox};

/// Default weight of the overlap term in the blended reward.
pub const DEFAULT_W_GT: f64 = 0.5;

fn max_of(s: &[f64]) -> f64 {
    s.iter().copied().fold(0.0, f64::max)
}

/// `clamp(0.5 + 0.5 (u_before - u_after) + 0.5 (max_after - max_before), 0, 1)`
/// with `u` the normalised entropy of a score vector.
pub fn uncertainty_reduction(before: &[f64], after: &[f64]) -> f64 {
    let du = normalized_entropy(before) - normalized_entropy(after);
    let dm = max_of(after) - max_of(before);
    (0.5 + 0.5 * du + 0.5 * dm).clamp(0.0, 1.0)
}

/// `w_gt * iou + (1 - w_gt) * UR`, or plain UR without a ground-truth box.
pub fn step_reward(pred: &BoundingBox, gt: Option<&BoundingBox>, before: &[f64], after: &[f64], w_gt: f64) -> f64 {
    let ur = uncertainty_reduction(before, after);
    match gt {
        Some(gt) => {
            let w = w_gt.clamp(0.0, 1.0);
            (w * iou(pred, gt) + (1.0 - w) * ur).clamp(0.0, 1.0)
        }
        None => ur,
    }
}
