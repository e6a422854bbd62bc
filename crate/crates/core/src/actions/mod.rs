//! The seven interpretable visual operators. Each one reads the current
//! region of interest (and, for a1, the lexicon) and writes one prompt slot.

pub mod color;
pub mod lexicon;
pub mod scene_cues;
pub mod texture;

use serde::{Deserialize, Serialize};

use crate::model::{ActionId, BoundingBox, PromptState, Slot, VisualContext};
use crate::raster::{RasterImage, Rgb};

pub use color::{dominant_color, kmeans_hsv, ColorCluster, ColorThresholds};
pub use lexicon::Lexicon;
pub use scene_cues::{GeometryThresholds, LightingThresholds};
pub use texture::{GrayPatch, TextureFeatures, TextureThresholds};

/// Every operator threshold. Defaults are the documented values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionConfig {
    pub kmeans_k: usize,
    pub kmeans_seed: u64,
    pub achromatic_saturation: f64,
    pub white_value: f64,
    pub black_value: f64,
    pub smooth_contrast: f64,
    pub striped_ratio: f64,
    pub patterned_uniform: f64,
    pub edge_threshold: f64,
    pub clutter_tau: f64,
    pub tall_ratio: f64,
    pub wide_ratio: f64,
    pub tiny_scale: f64,
    pub large_scale: f64,
    pub dark: f64,
    pub bright: f64,
    pub shadow_variance: f64,
}

impl Default for ActionConfig {
    fn default() -> Self {
        let c = ColorThresholds::default();
        let t = TextureThresholds::default();
        let g = GeometryThresholds::default();
        let l = LightingThresholds::default();
        ActionConfig {
            kmeans_k: 3,
            kmeans_seed: 0,
            achromatic_saturation: c.achromatic_saturation,
            white_value: c.white_value,
            black_value: c.black_value,
            smooth_contrast: t.smooth_contrast,
            striped_ratio: t.striped_ratio,
            patterned_uniform: t.patterned_uniform,
            edge_threshold: 64.0,
            clutter_tau: 0.15,
            tall_ratio: g.tall_ratio,
            wide_ratio: g.wide_ratio,
            tiny_scale: g.tiny_scale,
            large_scale: g.large_scale,
            dark: l.dark,
            bright: l.bright,
            shadow_variance: l.shadow_variance,
        }
    }
}

impl ActionConfig {
    pub fn color(&self) -> ColorThresholds {
        ColorThresholds {
            achromatic_saturation: self.achromatic_saturation,
            white_value: self.white_value,
            black_value: self.black_value,
        }
    }

    pub fn texture(&self) -> TextureThresholds {
        TextureThresholds {
            smooth_contrast: self.smooth_contrast,
            striped_ratio: self.striped_ratio,
            patterned_uniform: self.patterned_uniform,
        }
    }

    pub fn geometry(&self) -> GeometryThresholds {
        GeometryThresholds {
            tall_ratio: self.tall_ratio,
            wide_ratio: self.wide_ratio,
            tiny_scale: self.tiny_scale,
            large_scale: self.large_scale,
        }
    }

    pub fn lighting(&self) -> LightingThresholds {
        LightingThresholds {
            dark: self.dark,
            bright: self.bright,
            shadow_variance: self.shadow_variance,
        }
    }
}

/// Result of running one operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionOutcome {
    Applied { slot: Slot, phrase: String },
    Skipped { reason: String },
}

impl ActionOutcome {
    fn skipped(reason: impl Into<String>) -> Self {
        ActionOutcome::Skipped {
            reason: reason.into(),
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, ActionOutcome::Skipped { .. })
    }

    pub fn phrase(&self) -> Option<&str> {
        match self {
            ActionOutcome::Applied { phrase, .. } => Some(phrase),
            ActionOutcome::Skipped { .. } => None,
        }
    }
}

// Phrase builders; the scene generator uses the same ones to state ground truth.

pub fn alias_phrase(token: &str) -> String {
    format!("a {token} object")
}

pub fn color_phrase(name: &str) -> String {
    format!("{name} color")
}

pub fn texture_phrase(name: &str) -> String {
    format!("{name} texture")
}

pub fn background_phrase(tag: &str) -> String {
    format!("object against {tag} background")
}

pub fn geometry_phrase(class: &str) -> String {
    format!("{class} shaped")
}

pub fn lighting_phrase(cond: &str) -> String {
    format!("{cond} lighting")
}

pub fn spatial_phrase(pos: &str) -> String {
    format!("the {pos} object")
}

/// a1: alias from the lexicon; skipped when the noun has no visual candidate.
pub fn act_dictionary(prompt: &PromptState, lex: &Lexicon) -> ActionOutcome {
    match lex.visual_alias(prompt.base_noun()) {
        Some(token) => ActionOutcome::Applied {
            slot: Slot::Alias,
            phrase: alias_phrase(token),
        },
        None => ActionOutcome::skipped(format!("no visual alias for {:?}", prompt.base_noun())),
    }
}

/// a2.
pub fn act_color(roi_pixels: &[Rgb], cfg: &ActionConfig) -> ActionOutcome {
    match dominant_color(roi_pixels, cfg.kmeans_k.max(1), cfg.kmeans_seed, &cfg.color()) {
        Some(name) => ActionOutcome::Applied {
            slot: Slot::Color,
            phrase: color_phrase(name),
        },
        None => ActionOutcome::skipped("empty roi"),
    }
}

/// a3. Needs at least a 3×3 patch.
pub fn act_texture(patch: &GrayPatch, cfg: &ActionConfig) -> ActionOutcome {
    if patch.width < 3 || patch.height < 3 {
        return ActionOutcome::skipped(format!("roi {}x{} smaller than 3x3", patch.width, patch.height));
    }
    let f = texture::texture_features(patch);
    ActionOutcome::Applied {
        slot: Slot::Texture,
        phrase: texture_phrase(texture::classify_texture(&f, &cfg.texture())),
    }
}

/// a4.
pub fn act_background(image: &RasterImage, roi: &BoundingBox, cfg: &ActionConfig) -> ActionOutcome {
    let clutter = scene_cues::background_clutter(image, image.rect_of(roi), cfg.edge_threshold);
    ActionOutcome::Applied {
        slot: Slot::Background,
        phrase: background_phrase(scene_cues::background_tag(clutter, cfg.clutter_tau)),
    }
}

/// a5.
pub fn act_geometry(roi: &BoundingBox, image_width: u32, image_height: u32, cfg: &ActionConfig) -> ActionOutcome {
    if roi.area() <= 0.0 {
        return ActionOutcome::skipped("degenerate roi");
    }
    ActionOutcome::Applied {
        slot: Slot::Geometry,
        phrase: geometry_phrase(&scene_cues::geometry_class(roi, image_width, image_height, &cfg.geometry())),
    }
}

/// a6.
pub fn act_lighting(roi_pixels: &[Rgb], cfg: &ActionConfig) -> ActionOutcome {
    if roi_pixels.is_empty() {
        return ActionOutcome::skipped("empty roi");
    }
    let (mean, var) = scene_cues::value_stats(roi_pixels);
    ActionOutcome::Applied {
        slot: Slot::Lighting,
        phrase: lighting_phrase(scene_cues::lighting_condition(mean, var, &cfg.lighting())),
    }
}

/// a7.
pub fn act_spatial(roi: &BoundingBox, image_width: u32, image_height: u32) -> ActionOutcome {
    ActionOutcome::Applied {
        slot: Slot::Spatial,
        phrase: spatial_phrase(scene_cues::spatial_label(roi, image_width, image_height)),
    }
}

fn value_patch(image: &RasterImage, roi: &BoundingBox) -> GrayPatch {
    let rect = image.rect_of(roi);
    let data = image.region(rect).into_iter().map(crate::raster::value_byte).collect();
    GrayPatch::new(rect.width() as usize, rect.height() as usize, data)
}

/// Runs operator `action` on the context's region of interest.
pub fn run_operator(
    ctx: &VisualContext,
    action: ActionId,
    image: &RasterImage,
    lex: &Lexicon,
    cfg: &ActionConfig,
) -> ActionOutcome {
    let roi = &ctx.roi;
    let (w, h) = (image.width(), image.height());
    match action {
        ActionId::Dictionary => act_dictionary(&ctx.prompt, lex),
        ActionId::Color => act_color(&image.region(image.rect_of(roi)), cfg),
        ActionId::Texture => act_texture(&value_patch(image, roi), cfg),
        ActionId::Background => act_background(image, roi, cfg),
        ActionId::Geometry => act_geometry(roi, w, h, cfg),
        ActionId::Lighting => act_lighting(&image.region(image.rect_of(roi)), cfg),
        ActionId::Spatial => act_spatial(roi, w, h),
    }
}

/// `c_{t+1} = f(c_t, a_t)`: returns the successor context (step + 1, at most
/// one slot rewritten) together with what the operator did. The input is
/// never modified; a skipped operator only advances the step.
pub fn apply_action(
    ctx: &VisualContext,
    action: ActionId,
    image: &RasterImage,
    lex: &Lexicon,
    cfg: &ActionConfig,
) -> (VisualContext, ActionOutcome) {
    let outcome = run_operator(ctx, action, image, lex, cfg);
    let mut next = ctx.clone();
    next.step += 1;
    if let ActionOutcome::Applied { slot, phrase } = &outcome {
        next.prompt
            .set(*slot, phrase.clone())
            .expect("operators always emit non-empty phrases");
    }
    (next, outcome)
}
