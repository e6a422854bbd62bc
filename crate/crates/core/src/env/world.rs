//! A generated scene bundled with its image and mock detector.

use crate::actions::{ActionConfig, Lexicon};
use crate::error::Result;
use crate::model::BoundingBox;
use crate::raster::RasterImage;
use crate::rollout::Env;

use super::{gen_scene, MockDetector, SceneSpec};

pub struct World {
    pub spec: SceneSpec,
    pub image: RasterImage,
    pub gt: BoundingBox,
    pub detector: MockDetector,
}

impl World {
    /// Renders `spec` and sets up a detector that knows its ground truth.
    /// `noise_seed` selects the detector's noise stream.
    pub fn new(spec: SceneSpec, lexicon: &Lexicon, actions: &ActionConfig, noise_seed: u64) -> Result<Self> {
        let (image, gt) = gen_scene(&spec)?;
        let detector = MockDetector::new(spec.clone(), lexicon, actions.clutter_tau, noise_seed);
        Ok(World {
            spec,
            image,
            gt,
            detector,
        })
    }

    /// Uses a supplied image in place of the rendered one; the ground truth
    /// is taken from `spec`.
    pub fn with_image(
        spec: SceneSpec,
        image: RasterImage,
        lexicon: &Lexicon,
        actions: &ActionConfig,
        noise_seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        if (image.width(), image.height()) != (spec.width, spec.height) {
            return Err(crate::Error::validation(format!(
                "image of {} is {}x{}, scene says {}x{}",
                spec.image_id,
                image.width(),
                image.height(),
                spec.width,
                spec.height
            )));
        }
        let detector = MockDetector::new(spec.clone(), lexicon, actions.clutter_tau, noise_seed);
        Ok(World {
            gt: spec.gt_box,
            spec,
            image,
            detector,
        })
    }

    pub fn env<'a>(&'a self, lexicon: &'a Lexicon, actions: &'a ActionConfig, w_gt: f64) -> Env<'a> {
        Env {
            image_id: &self.spec.image_id,
            image: &self.image,
            noun: &self.spec.noun,
            gt: Some(self.gt),
            detector: &self.detector,
            lexicon,
            actions,
            w_gt,
        }
    }
}
