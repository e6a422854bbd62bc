//! Domain types shared by every stage of the loop: boxes, detections, the
//! slot-based prompt, visual contexts and the weak-unit encoder.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_ACTIONS: usize = 7;
pub const NUM_STATES: usize = 8;
pub const FEATURE_DIM: usize = 20;

/// Row-major 8×8 transition matrix indexed `[from_state][to_state]`.
pub type TransitionMatrix = [[f64; NUM_STATES]; NUM_STATES];

// Feature layout of a weak unit.
pub const FEAT_STATE: std::ops::Range<usize> = 0..8;
pub const FEAT_SLOTS: std::ops::Range<usize> = 8..15;
pub const FEAT_MAX_SCORE: usize = 15;
pub const FEAT_ENTROPY: usize = 16;
pub const FEAT_BOX_COUNT: usize = 17;
pub const FEAT_STEP: usize = 18;
pub const FEAT_BIAS: usize = 19;

/// Axis-aligned box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite coordinate in {self:?}")));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidBox(format!("empty extent in {self:?}")));
        }
        Ok(())
    }

    /// Box of the given size centred at `(cx, cy)`.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(
            cx - width / 2.0,
            cy - height / 2.0,
            cx + width / 2.0,
            cy + height / 2.0,
        )
    }

    pub fn width(&self) -> f64 {
        (self.x_max - self.x_min).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y_max - self.y_min).max(0.0)
    }

    /// Area, zero for degenerate boxes.
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        BoundingBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    pub fn within(&self, width: u32, height: u32) -> bool {
        self.x_min >= 0.0
            && self.y_min >= 0.0
            && self.x_max <= f64::from(width)
            && self.y_max <= f64::from(height)
    }

    /// Shifts the box (without resizing) so that it lies inside a
    /// `width × height` canvas. Boxes larger than the canvas are cropped.
    pub fn shift_into(&self, width: u32, height: u32) -> Self {
        let (w, h) = (f64::from(width), f64::from(height));
        let shift = |lo: f64, hi: f64, limit: f64| -> (f64, f64) {
            if hi - lo >= limit {
                (0.0, limit)
            } else if lo < 0.0 {
                (0.0, hi - lo)
            } else if hi > limit {
                (limit - (hi - lo), limit)
            } else {
                (lo, hi)
            }
        };
        let (x_min, x_max) = shift(self.x_min, self.x_max, w);
        let (y_min, y_max) = shift(self.y_min, self.y_max, h);
        BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }
}

/// Intersection over union. Degenerate boxes contribute zero area, so any
/// pair involving one has overlap 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 || inter <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// GT-seeded weak reward: large when the prediction misses the ground truth.
pub fn gt_reward(pred: &BoundingBox, gt: &BoundingBox) -> f64 {
    1.0 - iou(pred, gt)
}

/// Shannon entropy of `scores` (renormalised to a distribution) divided by
/// `ln K`. Zero for vectors with fewer than two classes or no mass.
pub fn normalized_entropy(scores: &[f64]) -> f64 {
    if scores.len() < 2 {
        return 0.0;
    }
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = scores
        .iter()
        .map(|&s| s / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    (h / (scores.len() as f64).ln()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub boxes: Vec<BoundingBox>,
    pub scores: Vec<Vec<f64>>,
}

impl DetectionResult {
    pub fn new(boxes: Vec<BoundingBox>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if boxes.len() != scores.len() {
            return Err(Error::validation(format!(
                "{} boxes but {} score vectors",
                boxes.len(),
                scores.len()
            )));
        }
        if scores
            .iter()
            .flatten()
            .any(|s| !(0.0..=1.0).contains(s))
        {
            return Err(Error::validation("detection score outside [0, 1]"));
        }
        Ok(DetectionResult { boxes, scores })
    }

    /// Index of the box holding the single highest class score.
    pub fn top_index(&self) -> Option<usize> {
        self.scores
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
            .fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((i, m)),
            })
            .map(|(i, _)| i)
    }

    pub fn top_box(&self) -> Option<&BoundingBox> {
        self.top_index().map(|i| &self.boxes[i])
    }

    /// Class distribution of the top-scoring box (empty if nothing detected).
    pub fn top_scores(&self) -> &[f64] {
        match self.top_index() {
            Some(i) => &self.scores[i],
            None => &[],
        }
    }

    pub fn max_score(&self) -> f64 {
        self.top_scores().iter().copied().fold(0.0, f64::max)
    }
}

/// One slot of the prompt caption, in action order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Alias,
    Color,
    Texture,
    Background,
    Geometry,
    Lighting,
    Spatial,
}

impl Slot {
    pub const ALL: [Slot; NUM_ACTIONS] = [
        Slot::Alias,
        Slot::Color,
        Slot::Texture,
        Slot::Background,
        Slot::Geometry,
        Slot::Lighting,
        Slot::Spatial,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::Alias => "alias",
            Slot::Color => "color",
            Slot::Texture => "texture",
            Slot::Background => "background",
            Slot::Geometry => "geometry",
            Slot::Lighting => "lighting",
            Slot::Spatial => "spatial",
        }
    }
}

/// The seven visual operators. Serialised as their 1-based number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ActionId {
    Dictionary,
    Color,
    Texture,
    Background,
    Geometry,
    Lighting,
    Spatial,
}

impl ActionId {
    pub const ALL: [ActionId; NUM_ACTIONS] = [
        ActionId::Dictionary,
        ActionId::Color,
        ActionId::Texture,
        ActionId::Background,
        ActionId::Geometry,
        ActionId::Lighting,
        ActionId::Spatial,
    ];

    /// Zero-based position (a1 → 0).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// The `aN` number, 1..=7.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn slot(self) -> Slot {
        Slot::ALL[self.index()]
    }

    pub fn state(self) -> StateId {
        StateId(self.number())
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionId::Dictionary => "dictionary",
            ActionId::Color => "color",
            ActionId::Texture => "texture",
            ActionId::Background => "background",
            ActionId::Geometry => "geometry",
            ActionId::Lighting => "lighting",
            ActionId::Spatial => "spatial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(n) = s.strip_prefix('a').and_then(|n| n.parse::<u8>().ok()) {
            return ActionId::try_from(n).ok();
        }
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl From<ActionId> for u8 {
    fn from(a: ActionId) -> u8 {
        a.number()
    }
}

impl TryFrom<u8> for ActionId {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        match n {
            1..=7 => Ok(ActionId::ALL[usize::from(n) - 1]),
            _ => Err(format!("action number {n} outside 1..=7")),
        }
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}:{}", self.number(), self.name())
    }
}

/// Discrete weak-Markov state: 0 is the initial state, `i` means action
/// `a_i` was applied last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct StateId(u8);

impl StateId {
    pub const INITIAL: StateId = StateId(0);

    pub fn new(value: u8) -> Result<Self> {
        if usize::from(value) >= NUM_STATES {
            return Err(Error::validation(format!("state id {value} outside 0..=7")));
        }
        Ok(StateId(value))
    }

    pub fn from_last_action(last: Option<ActionId>) -> Self {
        last.map_or(StateId::INITIAL, ActionId::state)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn action(self) -> Option<ActionId> {
        if self.0 == 0 {
            None
        } else {
            ActionId::try_from(self.0).ok()
        }
    }
}

impl From<StateId> for u8 {
    fn from(s: StateId) -> u8 {
        s.0
    }
}

impl TryFrom<u8> for StateId {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        StateId::new(n).map_err(|e| e.to_string())
    }
}

/// Slot-based caption: a base noun plus one optional attribute phrase per slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptState {
    base_noun: String,
    slots: [Option<String>; NUM_ACTIONS],
}

impl PromptState {
    pub fn new(base_noun: impl Into<String>) -> Result<Self> {
        let base_noun = base_noun.into();
        if base_noun.trim().is_empty() {
            return Err(Error::validation("prompt base noun is empty"));
        }
        Ok(PromptState {
            base_noun,
            slots: Default::default(),
        })
    }

    pub fn base_noun(&self) -> &str {
        &self.base_noun
    }

    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.slots[slot.index()].as_deref()
    }

    pub fn set(&mut self, slot: Slot, phrase: impl Into<String>) -> Result<()> {
        let phrase = phrase.into();
        if phrase.trim().is_empty() {
            return Err(Error::validation(format!("empty phrase for slot {}", slot.name())));
        }
        self.slots[slot.index()] = Some(phrase);
        Ok(())
    }

    pub fn with(mut self, slot: Slot, phrase: impl Into<String>) -> Result<Self> {
        self.set(slot, phrase)?;
        Ok(self)
    }

    pub fn is_filled(&self, slot: Slot) -> bool {
        self.slots[slot.index()].is_some()
    }

    pub fn filled_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    /// Caption text: the base noun followed by the filled phrases in slot order.
    pub fn render(&self) -> String {
        let mut out = self.base_noun.clone();
        for phrase in self.slots.iter().flatten() {
            out.push_str(", ");
            out.push_str(phrase);
        }
        out
    }
}

/// The agent's context `c_t`: which image, the region being examined, the
/// current prompt, the step counter and the latest detector output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualContext {
    pub image_id: String,
    pub image_width: u32,
    pub image_height: u32,
    pub roi: BoundingBox,
    pub prompt: PromptState,
    pub step: usize,
    pub detection: Option<DetectionResult>,
}

impl VisualContext {
    pub fn new(
        image_id: impl Into<String>,
        image_width: u32,
        image_height: u32,
        roi: BoundingBox,
        prompt: PromptState,
    ) -> Result<Self> {
        roi.validate()?;
        if !roi.within(image_width, image_height) {
            return Err(Error::InvalidBox(format!(
                "roi {roi:?} outside {image_width}x{image_height} image"
            )));
        }
        Ok(VisualContext {
            image_id: image_id.into(),
            image_width,
            image_height,
            roi,
            prompt,
            step: 0,
            detection: None,
        })
    }

    /// Records a detector output: the top box becomes the new region of interest.
    pub fn observe(&mut self, detection: DetectionResult) {
        if let Some(b) = detection.top_box() {
            let b = b.shift_into(self.image_width, self.image_height);
            if b.validate().is_ok() {
                self.roi = b;
            }
        }
        self.detection = Some(detection);
    }
}

/// Fused state–action representation `z_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakUnit {
    pub state: StateId,
    pub features: [f64; FEATURE_DIM],
}

impl WeakUnit {
    /// Euclidean distance over the context part of the features (slot flags
    /// and detector statistics). The state one-hot, step clock and bias are
    /// excluded.
    pub fn context_distance(&self, other: &WeakUnit) -> f64 {
        (FEAT_SLOTS.start..FEAT_STEP)
            .map(|i| (self.features[i] - other.features[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Encoder `g(c, a)`. `last` is `None` for the initial marker.
pub fn make_weak_unit(ctx: &VisualContext, last: Option<ActionId>, h_max: usize) -> WeakUnit {
    let state = StateId::from_last_action(last);
    let mut f = [0.0; FEATURE_DIM];
    f[state.index()] = 1.0;
    for slot in Slot::ALL {
        if ctx.prompt.is_filled(slot) {
            f[FEAT_SLOTS.start + slot.index()] = 1.0;
        }
    }
    if let Some(det) = &ctx.detection {
        f[FEAT_MAX_SCORE] = det.max_score();
        f[FEAT_ENTROPY] = normalized_entropy(det.top_scores());
        f[FEAT_BOX_COUNT] = (det.boxes.len() as f64 / 10.0).clamp(0.0, 1.0);
    }
    f[FEAT_STEP] = if h_max == 0 {
        1.0
    } else {
        (ctx.step as f64 / h_max as f64).clamp(0.0, 1.0)
    };
    f[FEAT_BIAS] = 1.0;
    WeakUnit { state, features: f }
}

/// Detector statistics around one transition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub max_before: f64,
    pub max_after: f64,
    pub entropy_before: f64,
    pub entropy_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub z_from: WeakUnit,
    pub action: ActionId,
    pub z_to: WeakUnit,
    pub reward: f64,
    pub diagnostics: StepDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    /// Set when the detector failed mid-episode; `steps` holds what was
    /// completed before the failure.
    pub aborted: bool,
}

impl Trajectory {
    /// Mean step reward, 0 for an empty trajectory.
    pub fn mean_reward(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.reward).sum::<f64>() / self.steps.len() as f64
    }
}

/// Everything sampled for one image: its trajectories and the empirical
/// transition posterior at the end of sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub trajectories: Vec<Trajectory>,
    pub transition_posterior: TransitionMatrix,
}

impl ImageRecord {
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.transition_posterior.iter().enumerate() {
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::validation(format!("posterior row {i} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!("posterior row {i} sums to {sum}")));
            }
            if row[0] != 0.0 {
                return Err(Error::validation(format!(
                    "posterior row {i} assigns mass to the initial state"
                )));
            }
        }
        for t in &self.trajectories {
            for s in &t.steps {
                if !(0.0..=1.0).contains(&s.reward) {
                    return Err(Error::validation(format!("reward {} outside [0, 1]", s.reward)));
                }
                if s.z_to.state != s.action.state() {
                    return Err(Error::validation("successor state does not match its action"));
                }
            }
        }
        Ok(())
    }

    /// Number of sampled trajectories, the image's sampling budget.
    pub fn budget(&self) -> usize {
        self.trajectories.len()
    }

    pub fn step_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.steps.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(a: f64, b: f64, c: f64, d: f64) -> BoundingBox {
        BoundingBox::new(a, b, c, d).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&bx(0., 0., 1., 1.), &bx(0., 0., 1., 1.)), 1.0);
        assert_eq!(iou(&bx(0., 0., 1., 1.), &bx(2., 2., 3., 3.)), 0.0);
        // inter = 1, union = 4 + 4 - 1 = 7
        assert!((iou(&bx(0., 0., 2., 2.), &bx(1., 1., 3., 3.)) - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn gt_reward_examples() {
        assert_eq!(gt_reward(&bx(0., 0., 1., 1.), &bx(0., 0., 1., 1.)), 0.0);
        assert_eq!(gt_reward(&bx(0., 0., 1., 1.), &bx(2., 2., 3., 3.)), 1.0);
        assert!((gt_reward(&bx(0., 0., 2., 2.), &bx(1., 1., 3., 3.)) - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_box_has_no_overlap() {
        let flat = BoundingBox {
            x_min: 1.0,
            y_min: 1.0,
            x_max: 1.0,
            y_max: 3.0,
        };
        assert!(flat.validate().is_err());
        assert_eq!(iou(&flat, &bx(0., 0., 2., 2.)), 0.0);
        assert_eq!(iou(&flat, &flat), 0.0);
    }

    #[test]
    fn box_validation() {
        assert!(BoundingBox::new(0., 0., f64::NAN, 1.).is_err());
        assert!(BoundingBox::new(2., 0., 1., 1.).is_err());
    }

    #[test]
    fn shift_into_keeps_size() {
        let b = bx(-5., 90., 15., 110.).shift_into(100, 100);
        assert_eq!(b, bx(0., 80., 20., 100.));
        let huge = bx(-10., -10., 200., 50.).shift_into(100, 100);
        assert_eq!(huge, bx(0., 0., 100., 60.));
    }

    fn ctx() -> VisualContext {
        VisualContext::new("img", 100, 100, bx(10., 10., 50., 50.), PromptState::new("cup").unwrap())
            .unwrap()
    }

    #[test]
    fn initial_weak_unit() {
        let z = make_weak_unit(&ctx(), None, 7);
        assert_eq!(z.state, StateId::INITIAL);
        assert_eq!(z.features[0], 1.0);
        assert!(z.features[FEAT_SLOTS].iter().all(|&v| v == 0.0));
        assert_eq!(z.features[FEAT_STEP], 0.0);
        assert_eq!(z.features[FEAT_BIAS], 1.0);
    }

    #[test]
    fn weak_unit_after_color() {
        let mut c = ctx();
        c.prompt.set(Slot::Color, "red color").unwrap();
        c.step = 1;
        let z = make_weak_unit(&c, Some(ActionId::Color), 7);
        assert_eq!(z.state.value(), 2);
        assert_eq!(z.features[2], 1.0);
        assert_eq!(z.features[FEAT_SLOTS.start + Slot::Color.index()], 1.0);
        assert_eq!(z.features[FEAT_SLOTS].iter().sum::<f64>(), 1.0);
        assert!((z.features[FEAT_STEP] - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(z, make_weak_unit(&c, Some(ActionId::Color), 7));
    }

    #[test]
    fn detection_features() {
        let mut c = ctx();
        let det = DetectionResult::new(
            vec![bx(10., 10., 40., 40.), bx(0., 0., 5., 5.)],
            vec![vec![0.5, 0.25, 0.25], vec![0.9, 0.05, 0.05]],
        )
        .unwrap();
        c.observe(det);
        assert_eq!(c.roi, bx(0., 0., 5., 5.));
        let z = make_weak_unit(&c, None, 7);
        assert_eq!(z.features[FEAT_MAX_SCORE], 0.9);
        assert!((z.features[FEAT_BOX_COUNT] - 0.2).abs() < 1e-15);
        assert!(z.features[FEAT_ENTROPY] > 0.0 && z.features[FEAT_ENTROPY] < 1.0);
    }

    #[test]
    fn detection_rejects_mismatched_lengths() {
        assert!(DetectionResult::new(vec![bx(0., 0., 1., 1.)], vec![]).is_err());
        assert!(DetectionResult::new(vec![bx(0., 0., 1., 1.)], vec![vec![1.5]]).is_err());
    }

    #[test]
    fn prompt_rendering_is_slot_ordered() {
        let p = PromptState::new("apricot")
            .unwrap()
            .with(Slot::Spatial, "the center object")
            .unwrap()
            .with(Slot::Alias, "a fruit object")
            .unwrap();
        assert_eq!(p.render(), "apricot, a fruit object, the center object");
        assert!(PromptState::new("  ").is_err());
        assert!(p.clone().with(Slot::Color, "").is_err());
    }

    #[test]
    fn action_numbering() {
        assert_eq!(ActionId::Dictionary.number(), 1);
        assert_eq!(ActionId::Spatial.state().value(), 7);
        assert_eq!(ActionId::parse("a3"), Some(ActionId::Texture));
        assert_eq!(ActionId::parse("lighting"), Some(ActionId::Lighting));
        assert!(ActionId::try_from(0u8).is_err());
        assert!(StateId::new(8).is_err());
        assert_eq!(serde_json::to_string(&ActionId::Geometry).unwrap(), "5");
    }

    #[test]
    fn normalized_entropy_bounds() {
        assert!((normalized_entropy(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-12);
        assert_eq!(normalized_entropy(&[1.0, 0.0, 0.0]), 0.0);
        assert_eq!(normalized_entropy(&[0.7]), 0.0);
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-50.0..50.0f64, -50.0..50.0f64, 0.01..40.0f64, 0.01..40.0f64)
            .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, x + w, y + h).unwrap())
    }

    proptest! {
        #[test]
        fn iou_symmetric(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(iou(&a, &b), iou(&b, &a));
            let v = iou(&a, &b);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn iou_self_is_one(a in arb_box()) {
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn gt_reward_is_one_minus_iou(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(gt_reward(&a, &b), 1.0 - iou(&a, &b));
        }

        #[test]
        fn weak_unit_one_hot(last in proptest::option::of(0usize..7), step in 0usize..8) {
            let mut c = ctx();
            c.step = step;
            let a = last.and_then(ActionId::from_index);
            let z = make_weak_unit(&c, a, 7);
            let block = &z.features[FEAT_STATE];
            prop_assert_eq!(block.iter().filter(|&&v| v == 1.0).count(), 1);
            prop_assert_eq!(block.iter().sum::<f64>(), 1.0);
            prop_assert!(z.features.iter().all(|v| v.is_finite()));
            prop_assert_eq!(&z, &make_weak_unit(&c, a, 7));
        }
    }
}
