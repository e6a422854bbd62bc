//! AttributeWorld scenes: one textured, lit object with planted attributes
//! over a clean or cluttered background.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::actions::color::{hue_center, COLOR_NAMES};
use crate::actions::scene_cues::{self, GeometryThresholds, ASPECT_NAMES, LIGHTING_NAMES, SCALE_NAMES};
use crate::actions::texture::TEXTURE_NAMES;
use crate::actions::{self, Lexicon};
use crate::error::{Error, Result};
use crate::model::{BoundingBox, Slot, NUM_ACTIONS};
use crate::raster::{hsv_to_rgb, Hsv, RasterImage};
use crate::seed::{hash_str, rng_for};

/// Default canvas edge.
pub const DEFAULT_CANVAS: u32 = 128;

/// Amplitude of the texture modulation on the value channel.
const TEXTURE_AMPLITUDE: f64 = 0.12;
const CHROMATIC_LIGHTING: [&str; 3] = ["overexposed", "shadowed", "well-lit"];
/// Edge of the tiles the clutter pattern is laid out in.
const CLUTTER_TILE: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub image_id: String,
    #[serde(default = "default_canvas")]
    pub width: u32,
    #[serde(default = "default_canvas")]
    pub height: u32,
    pub noun: String,
    pub true_color: String,
    pub true_texture: String,
    /// `"<aspect> <scale>"`, e.g. `"wide medium"`.
    pub true_geometry: String,
    pub true_lighting: String,
    pub true_position: String,
    pub background_clutter: f64,
    pub gt_box: BoundingBox,
    pub seed: u64,
}

fn default_canvas() -> u32 {
    DEFAULT_CANVAS
}

fn check_vocab(field: &str, value: &str, vocab: &[&str]) -> Result<()> {
    if vocab.contains(&value) {
        Ok(())
    } else {
        Err(Error::validation(format!("{field} {value:?} not in {vocab:?}")))
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("scene canvas must be non-empty"));
        }
        self.gt_box.validate()?;
        if !self.gt_box.within(self.width, self.height) {
            return Err(Error::InvalidBox(format!(
                "gt_box {:?} exceeds the {}x{} canvas",
                self.gt_box, self.width, self.height
            )));
        }
        if self.noun.trim().is_empty() {
            return Err(Error::validation("scene noun is empty"));
        }
        check_vocab("true_color", &self.true_color, &COLOR_NAMES)?;
        check_vocab("true_texture", &self.true_texture, &TEXTURE_NAMES)?;
        check_vocab("true_lighting", &self.true_lighting, &LIGHTING_NAMES)?;
        check_vocab("true_position", &self.true_position, &scene_cues::SPATIAL_NAMES)?;
        let mut geo = self.true_geometry.split(' ');
        match (geo.next(), geo.next(), geo.next()) {
            (Some(a), Some(s), None) => {
                check_vocab("true_geometry aspect", a, &ASPECT_NAMES)?;
                check_vocab("true_geometry scale", s, &SCALE_NAMES)?;
            }
            _ => return Err(Error::validation(format!("malformed true_geometry {:?}", self.true_geometry))),
        }
        if !(0.0..=1.0).contains(&self.background_clutter) {
            return Err(Error::validation("background_clutter outside [0, 1]"));
        }
        Ok(())
    }

    /// Background tag the scene was planted with.
    pub fn true_background(&self, clutter_tau: f64) -> &'static str {
        scene_cues::background_tag(self.background_clutter, clutter_tau)
    }

    /// The phrase each operator should produce on this scene, by slot. The
    /// alias is `None` when the lexicon has no visual candidate for the noun.
    pub fn true_phrases(&self, lex: &Lexicon, clutter_tau: f64) -> [Option<String>; NUM_ACTIONS] {
        let mut out: [Option<String>; NUM_ACTIONS] = Default::default();
        out[Slot::Alias.index()] = lex.visual_alias(&self.noun).map(actions::alias_phrase);
        out[Slot::Color.index()] = Some(actions::color_phrase(&self.true_color));
        out[Slot::Texture.index()] = Some(actions::texture_phrase(&self.true_texture));
        out[Slot::Background.index()] = Some(actions::background_phrase(self.true_background(clutter_tau)));
        out[Slot::Geometry.index()] = Some(actions::geometry_phrase(&self.true_geometry));
        out[Slot::Lighting.index()] = Some(actions::lighting_phrase(&self.true_lighting));
        out[Slot::Spatial.index()] = Some(actions::spatial_phrase(&self.true_position));
        out
    }

    /// Draws a consistent random scene: the box is built from the drawn
    /// geometry and position, and the stored geometry/position are recomputed
    /// from the final box so they always match it.
    pub fn random(image_id: impl Into<String>, seed: u64, lex: &Lexicon) -> Self {
        let image_id = image_id.into();
        let mut rng = rng_for(&[seed, hash_str(&image_id)]);
        let (w, h) = (DEFAULT_CANVAS, DEFAULT_CANVAS);

        let nouns: Vec<&str> = lex.terms().collect();
        let noun = nouns.choose(&mut rng).copied().unwrap_or("object").to_string();

        let true_color = *COLOR_NAMES.choose(&mut rng).unwrap();
        let true_lighting = match true_color {
            "white" => "overexposed",
            "black" => "underexposed",
            "gray" => "well-lit",
            // A dark chromatic object reads as black, so chromatic colours
            // are never underexposed.
            _ => *CHROMATIC_LIGHTING.choose(&mut rng).unwrap(),
        };
        let true_texture = *TEXTURE_NAMES.choose(&mut rng).unwrap();

        let aspect = rng.random_range(0..3);
        let scale = rng.random_range(0..3);
        let ar = [0.5, 1.0, 2.0][aspect];
        let sc = [0.012, 0.12, 0.5][scale];
        let area = sc * f64::from(w) * f64::from(h);
        let bw = (area * ar).sqrt().round().clamp(4.0, f64::from(w));
        let bh = (area / ar).sqrt().round().clamp(4.0, f64::from(h));
        let cell = rng.random_range(0..9);
        let cx = (f64::from(cell % 3) + 0.5) * f64::from(w) / 3.0;
        let cy = (f64::from(cell / 3) + 0.5) * f64::from(h) / 3.0;
        let cx = cx.round();
        let cy = cy.round();
        let gt_box = BoundingBox::new(
            (cx - (bw / 2.0).floor()).round(),
            (cy - (bh / 2.0).floor()).round(),
            (cx - (bw / 2.0).floor()).round() + bw,
            (cy - (bh / 2.0).floor()).round() + bh,
        )
        .expect("positive size")
        .shift_into(w, h);

        let background_clutter = if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.4..=1.0)
        };

        SceneSpec {
            image_id,
            width: w,
            height: h,
            noun,
            true_color: true_color.to_string(),
            true_texture: true_texture.to_string(),
            true_geometry: scene_cues::geometry_class(&gt_box, w, h, &GeometryThresholds::default()),
            true_lighting: true_lighting.to_string(),
            true_position: scene_cues::spatial_label(&gt_box, w, h).to_string(),
            background_clutter,
            gt_box,
            seed: rng.random(),
        }
    }
}

/// A batch of `n` random scenes with ids `scene-0000`, `scene-0001`, ...
pub fn random_scenes(n: usize, seed: u64, lex: &Lexicon) -> Vec<SceneSpec> {
    (0..n)
        .map(|i| SceneSpec::random(format!("scene-{i:04}"), seed, lex))
        .collect()
}

fn base_value(color: &str) -> f64 {
    match color {
        "white" => 0.97,
        "black" => 0.1,
        "gray" => 0.55,
        _ => 0.7,
    }
}

/// Renders the scene. Identical specs give byte-identical images.
pub fn gen_scene(spec: &SceneSpec) -> Result<(RasterImage, BoundingBox)> {
    spec.validate()?;
    let mut rng = rng_for(&[spec.seed, hash_str(&spec.image_id), 0xb6]);
    let (w, h) = (spec.width, spec.height);

    // Background: muted colour, with 2-px checkerboard tiles laid down with
    // probability `background_clutter`.
    let bg_hue: f64 = rng.random_range(0.0..360.0);
    let bg = Hsv {
        h: bg_hue,
        s: rng.random_range(0.05..0.3),
        v: rng.random_range(0.35..0.6),
    };
    let bg_light = hsv_to_rgb(Hsv { v: (bg.v + 0.3).min(1.0), ..bg });
    let bg_dark = hsv_to_rgb(Hsv { v: (bg.v - 0.3).max(0.0), ..bg });
    let bg_rgb = hsv_to_rgb(bg);
    let tiles_x = w.div_ceil(CLUTTER_TILE);
    let tiles_y = h.div_ceil(CLUTTER_TILE);
    let cluttered: Vec<bool> = (0..tiles_x * tiles_y)
        .map(|_| rng.random::<f64>() < spec.background_clutter)
        .collect();
    let mut img = RasterImage::from_fn(w, h, |x, y| {
        let tile = (y / CLUTTER_TILE) * tiles_x + x / CLUTTER_TILE;
        if cluttered[tile as usize] {
            if (x / 2 + y / 2) % 2 == 0 {
                bg_light
            } else {
                bg_dark
            }
        } else {
            bg_rgb
        }
    })?;

    let rect = img.rect_of(&spec.gt_box);
    let (hue, sat) = match hue_center(&spec.true_color) {
        Some(h) => (h, 1.0),
        None => (0.0, 0.0),
    };
    let base = base_value(&spec.true_color);
    let rows = rect.height().max(1);
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let (lx, ly) = (x - rect.x0, y - rect.y0);
            let lit = match spec.true_lighting.as_str() {
                "underexposed" => base.min(0.14),
                "overexposed" => base.max(0.97),
                // vertical fall-off from 0.95 to 0.1
                "shadowed" => 0.95 - 0.85 * f64::from(ly) / f64::from((rows - 1).max(1)),
                _ => base,
            };
            let tex = match spec.true_texture.as_str() {
                "striped" => {
                    if lx % 2 == 0 {
                        TEXTURE_AMPLITUDE
                    } else {
                        -TEXTURE_AMPLITUDE
                    }
                }
                "patterned" => {
                    if (lx / 4 + ly / 4) % 2 == 0 {
                        TEXTURE_AMPLITUDE
                    } else {
                        -TEXTURE_AMPLITUDE
                    }
                }
                "rough" => rng.random_range(-TEXTURE_AMPLITUDE..TEXTURE_AMPLITUDE),
                _ => 0.0,
            };
            let v = (lit + tex).clamp(0.02, 1.0);
            img.set(x, y, hsv_to_rgb(Hsv { h: hue, s: sat, v }));
        }
    }
    Ok((img, spec.gt_box))
}
