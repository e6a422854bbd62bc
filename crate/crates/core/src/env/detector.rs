//! Detector interface and the attribute-matching mock used as its stand-in.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::actions::Lexicon;
use crate::error::Result;
use crate::model::{BoundingBox, DetectionResult, PromptState, Slot, NUM_ACTIONS};
use crate::raster::RasterImage;
use crate::seed::{hash_str, rng_for};

use super::scene::SceneSpec;

/// Class names behind the three score entries: the target and two fixed
/// distractors.
pub const DISTRACTOR_PHRASES: [&str; 2] = ["truck", "sign"];

/// `p = D(x, T)`. Implementations must be usable from several threads at
/// once. `step` is the refinement step the call belongs to (0 for the
/// noun-only prompt); any noise must be a function of image, step and seed.
pub trait DetectorPort: Send + Sync {
    fn detect(&self, image: &RasterImage, prompt: &PromptState, step: u64) -> Result<DetectionResult>;
}

/// Scores a prompt by how many slots carry the scene's true attribute phrase
/// and returns the ground-truth box jittered in inverse proportion.
#[derive(Debug, Clone)]
pub struct MockDetector {
    spec: SceneSpec,
    truth: [Option<String>; NUM_ACTIONS],
    noise_seed: u64,
    distractor_logits: [f64; 2],
}

impl MockDetector {
    pub fn new(spec: SceneSpec, lex: &Lexicon, clutter_tau: f64, noise_seed: u64) -> Self {
        let truth = spec.true_phrases(lex, clutter_tau);
        let mut rng = rng_for(&[spec.seed, hash_str(&spec.image_id), noise_seed, 0xd15]);
        let distractor_logits = [rng.random::<f64>(), rng.random::<f64>()];
        MockDetector {
            spec,
            truth,
            noise_seed,
            distractor_logits,
        }
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn true_phrase(&self, slot: Slot) -> Option<&str> {
        self.truth[slot.index()].as_deref()
    }

    /// Fraction of the seven slots whose phrase equals the truth.
    pub fn match_score(&self, prompt: &PromptState) -> f64 {
        let hits = Slot::ALL
            .iter()
            .filter(|&&s| matches!((prompt.get(s), self.true_phrase(s)), (Some(p), Some(t)) if p == t))
            .count();
        hits as f64 / NUM_ACTIONS as f64
    }

    /// Jitter standard deviation for match score `m`.
    pub fn sigma(&self, m: f64) -> f64 {
        0.25 * self.spec.gt_box.diagonal() * (1.0 - m)
    }

    pub fn scores(&self, m: f64) -> Vec<f64> {
        softmax(&[2.0 * m, self.distractor_logits[0], self.distractor_logits[1]])
    }

    /// Detection for an explicit match score. `key` selects the noise draw;
    /// `detect` uses the step and the rendered prompt.
    pub fn detect_with_match(&self, m: f64, key: u64) -> DetectionResult {
        let sigma = self.sigma(m);
        let gt = self.spec.gt_box;
        let bx = if sigma > 0.0 {
            let mut rng = rng_for(&[hash_str(&self.spec.image_id), key, self.noise_seed, self.spec.seed]);
            let normal = Normal::new(0.0, sigma).expect("finite sigma");
            let dx = normal.sample(&mut rng);
            let dy = normal.sample(&mut rng);
            gt.translate(dx, dy).shift_into(self.spec.width, self.spec.height)
        } else {
            gt
        };
        DetectionResult::new(vec![bx], vec![self.scores(m)]).expect("scores are a distribution")
    }
}

impl DetectorPort for MockDetector {
    fn detect(&self, _image: &RasterImage, prompt: &PromptState, step: u64) -> Result<DetectionResult> {
        let key = crate::seed::derive_seed(&[step, hash_str(&prompt.render())]);
        Ok(self.detect_with_match(self.match_score(prompt), key))
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let hi = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - hi).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Detector that fails from a given step on, for exercising abort paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct FailingDetector {
    /// Steps before this one succeed (as a certain detection of the whole
    /// image).
    pub fail_from_step: u64,
}

impl DetectorPort for FailingDetector {
    fn detect(&self, image: &RasterImage, _prompt: &PromptState, step: u64) -> Result<DetectionResult> {
        if step < self.fail_from_step {
            let b = BoundingBox::new(0.0, 0.0, f64::from(image.width()), f64::from(image.height()))?;
            return DetectionResult::new(vec![b], vec![vec![1.0]]);
        }
        Err(crate::Error::Detector(format!("detector unavailable at step {step}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::iou;

    fn detector() -> MockDetector {
        let lex = Lexicon::builtin();
        MockDetector::new(SceneSpec::random("d", 1, &lex), &lex, 0.15, 7)
    }

    fn full_prompt(d: &MockDetector) -> PromptState {
        let mut p = PromptState::new(&d.spec().noun).unwrap();
        for s in Slot::ALL {
            p.set(s, d.true_phrase(s).unwrap()).unwrap();
        }
        p
    }

    #[test]
    fn perfect_prompt_returns_gt() {
        let d = detector();
        let p = full_prompt(&d);
        assert_eq!(d.match_score(&p), 1.0);
        let img = RasterImage::filled(d.spec().width, d.spec().height, [0, 0, 0]).unwrap();
        for step in 0..20 {
            let det = d.detect(&img, &p, step).unwrap();
            assert_eq!(det.boxes[0], d.spec().gt_box);
            assert_eq!(iou(&det.boxes[0], &d.spec().gt_box), 1.0);
        }
    }

    #[test]
    fn sigma_formula() {
        let d = detector();
        let s0 = 0.25 * d.spec().gt_box.diagonal();
        assert_eq!(d.sigma(0.0), s0);
        assert!((d.sigma(4.0 / 7.0) - 3.0 / 7.0 * s0).abs() < 1e-12);
        assert_eq!(d.match_score(&PromptState::new("x").unwrap()), 0.0);
    }

    #[test]
    fn wrong_phrase_does_not_match() {
        let d = detector();
        let p = full_prompt(&d).with(Slot::Color, "mauve color").unwrap();
        assert!((d.match_score(&p) - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn target_score_grows_with_match() {
        let d = detector();
        let lo = d.scores(0.0);
        let hi = d.scores(1.0);
        assert!((lo.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(hi[0] > lo[0]);
        assert!((lo[1] / lo[2] - hi[1] / hi[2]).abs() < 1e-12);
    }

    #[test]
    fn boxes_stay_in_canvas_and_steps_differ() {
        let d = detector();
        let a = d.detect_with_match(0.0, 1);
        let b = d.detect_with_match(0.0, 2);
        assert_ne!(a.boxes[0], b.boxes[0]);
        assert_eq!(a, d.detect_with_match(0.0, 1));
        for step in 0..200 {
            let r = d.detect_with_match(0.0, step);
            assert!(r.boxes[0].within(d.spec().width, d.spec().height));
        }
    }
}
