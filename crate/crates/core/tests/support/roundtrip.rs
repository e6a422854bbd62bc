#![allow(dead_code)]

//! Operator read-back of planted scene attributes. Each check returns the
//! list of mismatches.

use std::collections::BTreeSet;

use vcot_core::actions::color::COLOR_NAMES;
use vcot_core::actions::scene_cues::{self, GeometryThresholds, SPATIAL_NAMES};
use vcot_core::actions::texture::TEXTURE_NAMES;
use vcot_core::actions::{run_operator, ActionConfig, ActionOutcome, Lexicon};
use vcot_core::env::{gen_scene, SceneSpec};
use vcot_core::model::{ActionId, BoundingBox, PromptState, VisualContext};

pub fn lighting_for(color: &str) -> &'static [&'static str] {
    match color {
        "white" => &["overexposed"],
        "black" => &["underexposed"],
        "gray" => &["well-lit"],
        _ => &["overexposed", "shadowed", "well-lit"],
    }
}

pub fn spec(color: &str, texture: &str, lighting: &str, gt: BoundingBox, clutter: f64, seed: u64) -> SceneSpec {
    SceneSpec {
        image_id: format!("{color}-{texture}-{lighting}-{seed}"),
        width: 128,
        height: 128,
        noun: "mug".into(),
        true_color: color.into(),
        true_texture: texture.into(),
        true_geometry: scene_cues::geometry_class(&gt, 128, 128, &GeometryThresholds::default()),
        true_lighting: lighting.into(),
        true_position: scene_cues::spatial_label(&gt, 128, 128).into(),
        background_clutter: clutter,
        gt_box: gt,
        seed,
    }
}

fn outcome_phrase(o: ActionOutcome) -> Option<String> {
    match o {
        ActionOutcome::Applied { phrase, .. } => Some(phrase),
        ActionOutcome::Skipped { .. } => None,
    }
}

/// Runs every operator with the roi on the ground-truth box and compares
/// with the planted phrase.
pub fn mismatches(s: &SceneSpec, lex: &Lexicon) -> Vec<String> {
    let cfg = ActionConfig::default();
    let (img, gt) = gen_scene(s).unwrap();
    let ctx = VisualContext::new(&s.image_id, s.width, s.height, gt, PromptState::new(&s.noun).unwrap()).unwrap();
    let truth = s.true_phrases(lex, cfg.clutter_tau);
    let mut bad = Vec::new();
    for a in ActionId::ALL {
        let got = outcome_phrase(run_operator(&ctx, a, &img, lex, &cfg));
        if got != truth[a.slot().index()] {
            bad.push(format!("{}: {}: {:?} vs {:?}", s.image_id, a, got, truth[a.slot().index()]));
        }
    }
    bad
}

/// Every colour, texture and compatible lighting on a clutter-free scene.
pub fn appearance_failures(lex: &Lexicon) -> Vec<String> {
    let gt = BoundingBox::new(44.0, 44.0, 84.0, 84.0).unwrap();
    let mut failures = Vec::new();
    for color in COLOR_NAMES {
        for texture in TEXTURE_NAMES {
            for &lighting in lighting_for(color) {
                failures.extend(mismatches(&spec(color, texture, lighting, gt, 0.0, 11), lex));
            }
        }
    }
    failures
}

/// Box shapes covering every geometry class, placed in every grid cell.
pub fn geometry_failures(lex: &Lexicon) -> Vec<String> {
    let mut failures = Vec::new();
    let mut seen_geo = BTreeSet::new();
    let mut seen_pos = BTreeSet::new();
    for (w, h) in [(8.0, 16.0), (14.0, 14.0), (22.0, 11.0), (28.0, 56.0), (40.0, 40.0), (56.0, 28.0), (64.0, 128.0), (90.0, 90.0), (128.0, 64.0)] {
        for cell in 0..9 {
            let cx = (f64::from(cell % 3) + 0.5) * 128.0 / 3.0;
            let cy = (f64::from(cell / 3) + 0.5) * 128.0 / 3.0;
            let gt = BoundingBox::new((cx - w / 2.0).round(), (cy - h / 2.0).round(), (cx - w / 2.0).round() + w, (cy - h / 2.0).round() + h)
                .unwrap()
                .shift_into(128, 128);
            let s = spec("green", "smooth", "well-lit", gt, 0.0, 3);
            seen_geo.insert(s.true_geometry.clone());
            seen_pos.insert(s.true_position.clone());
            failures.extend(mismatches(&s, lex).into_iter().map(|m| format!("{w}x{h} cell {cell}: {m}")));
        }
    }
    if seen_geo.len() != 9 {
        failures.push(format!("geometry classes covered: {seen_geo:?}"));
    }
    if seen_pos.len() != SPATIAL_NAMES.len() {
        failures.push(format!("positions covered: {seen_pos:?}"));
    }
    failures
}

/// a1 on every lexicon noun: applied, equal to the lexicon's visual alias,
/// and identical on a repeat call.
pub fn dictionary_failures(lex: &Lexicon) -> Vec<String> {
    let cfg = ActionConfig::default();
    let gt = BoundingBox::new(44.0, 44.0, 84.0, 84.0).unwrap();
    let mut failures = Vec::new();
    for noun in lex.terms() {
        let mut s = spec("red", "smooth", "well-lit", gt, 0.0, 1);
        s.noun = noun.to_string();
        let (img, gt) = gen_scene(&s).unwrap();
        let ctx = VisualContext::new(&s.image_id, s.width, s.height, gt, PromptState::new(noun).unwrap()).unwrap();
        let first = outcome_phrase(run_operator(&ctx, ActionId::Dictionary, &img, lex, &cfg));
        let again = outcome_phrase(run_operator(&ctx, ActionId::Dictionary, &img, lex, &cfg));
        let want = s.true_phrases(lex, cfg.clutter_tau)[ActionId::Dictionary.slot().index()].clone();
        if first.is_none() || first != want || first != again {
            failures.push(format!("{noun}: {first:?} / {again:?} vs {want:?}"));
        }
    }
    failures
}

/// Random scenes (some cluttered) from the generator.
pub fn random_scene_failures(lex: &Lexicon, n: usize, seed: u64) -> Vec<String> {
    vcot_core::env::random_scenes(n, seed, lex)
        .iter()
        .flat_map(|s| mismatches(s, lex))
        .collect()
}
