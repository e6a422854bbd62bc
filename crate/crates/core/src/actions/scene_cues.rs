//! Operators a4–a7: background clutter, box geometry, lighting and layout.

use crate::model::BoundingBox;
use crate::raster::{value_byte, PixelRect, RasterImage, Rgb};

/// Sobel gradient magnitude at every pixel of the value channel, with
/// replicated borders.
pub fn sobel_magnitude(image: &RasterImage) -> Vec<f64> {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let v = image.value_plane();
    let at = |x: i64, y: i64| -> f64 {
        let x = x.clamp(0, w - 1);
        let y = y.clamp(0, h - 1);
        f64::from(v[(y * w + x) as usize])
    };
    let mut out = Vec::with_capacity(v.len());
    for y in 0..h {
        for x in 0..w {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out.push(gx.hypot(gy));
        }
    }
    out
}

/// Fraction of background pixels (everything outside `fg`) whose Sobel
/// magnitude exceeds `edge_threshold`. An empty background scores 0.
pub fn background_clutter(image: &RasterImage, fg: PixelRect, edge_threshold: f64) -> f64 {
    let mag = sobel_magnitude(image);
    let w = image.width();
    let mut edges = 0usize;
    let mut total = 0usize;
    for y in 0..image.height() {
        for x in 0..w {
            if fg.contains(x, y) {
                continue;
            }
            total += 1;
            if mag[(y * w + x) as usize] > edge_threshold {
                edges += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        edges as f64 / total as f64
    }
}

pub fn background_tag(clutter: f64, tau: f64) -> &'static str {
    if clutter > tau {
        "cluttered"
    } else {
        "clean"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryThresholds {
    pub tall_ratio: f64,
    pub wide_ratio: f64,
    pub tiny_scale: f64,
    pub large_scale: f64,
}

impl Default for GeometryThresholds {
    fn default() -> Self {
        GeometryThresholds {
            tall_ratio: 0.67,
            wide_ratio: 1.5,
            tiny_scale: 0.02,
            large_scale: 0.4,
        }
    }
}

pub const ASPECT_NAMES: [&str; 3] = ["tall", "square", "wide"];
pub const SCALE_NAMES: [&str; 3] = ["tiny", "medium", "large"];

pub fn aspect_class(ar: f64, thr: &GeometryThresholds) -> &'static str {
    if ar < thr.tall_ratio {
        "tall"
    } else if ar > thr.wide_ratio {
        "wide"
    } else {
        "square"
    }
}

pub fn scale_class(scale: f64, thr: &GeometryThresholds) -> &'static str {
    if scale < thr.tiny_scale {
        "tiny"
    } else if scale > thr.large_scale {
        "large"
    } else {
        "medium"
    }
}

/// `"<aspect> <scale>"`, e.g. `"square tiny"`.
pub fn geometry_class(roi: &BoundingBox, image_width: u32, image_height: u32, thr: &GeometryThresholds) -> String {
    let ar = roi.width() / roi.height();
    let scale = roi.area() / (f64::from(image_width) * f64::from(image_height));
    format!("{} {}", aspect_class(ar, thr), scale_class(scale, thr))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightingThresholds {
    pub dark: f64,
    pub bright: f64,
    pub shadow_variance: f64,
}

impl Default for LightingThresholds {
    fn default() -> Self {
        LightingThresholds {
            dark: 0.25,
            bright: 0.85,
            shadow_variance: 0.05,
        }
    }
}

pub const LIGHTING_NAMES: [&str; 4] = ["underexposed", "overexposed", "shadowed", "well-lit"];

/// Population mean and variance of the value channel in `[0, 1]`.
pub fn value_stats(pixels: &[Rgb]) -> (f64, f64) {
    let n = pixels.len() as f64;
    let vals = pixels.iter().map(|p| f64::from(value_byte(*p)) / 255.0);
    let mean = vals.clone().sum::<f64>() / n;
    let var = vals.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Branches are tested top to bottom: dark, bright, shadow, otherwise well-lit.
pub fn lighting_condition(mean: f64, var: f64, thr: &LightingThresholds) -> &'static str {
    if mean < thr.dark {
        "underexposed"
    } else if mean > thr.bright {
        "overexposed"
    } else if var > thr.shadow_variance {
        "shadowed"
    } else {
        "well-lit"
    }
}

pub const SPATIAL_NAMES: [&str; 9] = [
    "top-left",
    "top",
    "top-right",
    "left",
    "center",
    "right",
    "bottom-left",
    "bottom",
    "bottom-right",
];

/// Grid cell (0..3) of a normalised coordinate; a point on a boundary
/// belongs to the lower cell.
fn grid_cell(t: f64) -> usize {
    if t <= 1.0 / 3.0 {
        0
    } else if t <= 2.0 / 3.0 {
        1
    } else {
        2
    }
}

pub fn spatial_label(roi: &BoundingBox, image_width: u32, image_height: u32) -> &'static str {
    let (cx, cy) = roi.center();
    let col = grid_cell(cx / f64::from(image_width));
    let row = grid_cell(cy / f64::from(image_height));
    SPATIAL_NAMES[row * 3 + col]
}
