//! a2: dominant colour via k-means over HSV pixels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{rgb_to_hsv, Hsv, Rgb};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorCluster {
    pub centroid: Hsv,
    pub count: usize,
}

/// Cone embedding of HSV: hue wraps correctly and achromatic pixels collapse
/// onto the value axis.
fn embed(p: &Hsv) -> [f64; 3] {
    let rad = p.h.to_radians();
    let chroma = p.s * p.v;
    [chroma * rad.cos(), chroma * rad.sin(), p.v]
}

fn unembed(c: [f64; 3]) -> Hsv {
    let chroma = c[0].hypot(c[1]);
    let v = c[2].clamp(0.0, 1.0);
    let h = if chroma < 1e-12 {
        0.0
    } else {
        c[1].atan2(c[0]).to_degrees().rem_euclid(360.0)
    };
    let s = if v <= 0.0 { 0.0 } else { (chroma / v).clamp(0.0, 1.0) };
    Hsv {
        h: if h >= 360.0 { 0.0 } else { h },
        s,
        v,
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn nearest(p: &[f64; 3], centers: &[[f64; 3]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Seeded k-means++ followed by Lloyd iterations until assignments settle.
/// Always returns `k` clusters; counts sum to `pixels.len()`. Duplicate
/// centroids appear when there are fewer distinct pixels than `k`.
pub fn kmeans_hsv(pixels: &[Hsv], k: usize, seed: u64) -> Vec<ColorCluster> {
    assert!(!pixels.is_empty(), "kmeans_hsv needs at least one pixel");
    assert!(k >= 1, "kmeans_hsv needs k >= 1");
    let points: Vec<[f64; 3]> = pixels.iter().map(embed).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total <= 0.0 {
            rng.random_range(0..points.len())
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        };
        let c = points[pick];
        for (d, p) in d2.iter_mut().zip(&points) {
            *d = d.min(dist2(p, &c));
        }
        centers.push(c);
    }

    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (a, p) in assign.iter_mut().zip(&points) {
            let n = nearest(p, &centers);
            if *a != n {
                *a = n;
                changed = true;
            }
        }
        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assign.iter().zip(&points) {
            counts[a] += 1;
            for d in 0..3 {
                sums[a][d] += p[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let n = counts[c] as f64;
                centers[c] = [sums[c][0] / n, sums[c][1] / n, sums[c][2] / n];
            }
        }
        if !changed {
            break;
        }
    }

    let mut counts = vec![0usize; k];
    for &a in &assign {
        counts[a] += 1;
    }
    centers
        .into_iter()
        .zip(counts)
        .map(|(c, count)| ColorCluster {
            centroid: unembed(c),
            count,
        })
        .collect()
}

/// Largest cluster; ties go to the lower index.
pub fn largest_cluster(clusters: &[ColorCluster]) -> Option<&ColorCluster> {
    clusters
        .iter()
        .fold(None, |best: Option<&ColorCluster>, c| match best {
            Some(b) if b.count >= c.count => Some(b),
            _ => Some(c),
        })
}

pub const COLOR_NAMES: [&str; 11] = [
    "red", "orange", "yellow", "green", "cyan", "blue", "purple", "pink", "white", "gray", "black",
];

/// Hue bands `[lo, hi)` in degrees. Red wraps through 0. Blue and purple
/// split their overlap at the midpoint of their centres (262.5°).
const HUE_BANDS: [(&str, f64, f64); 8] = [
    ("red", 345.0, 15.0),
    ("orange", 15.0, 45.0),
    ("yellow", 45.0, 75.0),
    ("green", 75.0, 165.0),
    ("cyan", 165.0, 195.0),
    ("blue", 195.0, 262.5),
    ("purple", 262.5, 315.0),
    ("pink", 315.0, 345.0),
];

/// Nominal centre hue of each chromatic name.
pub fn hue_center(name: &str) -> Option<f64> {
    Some(match name {
        "red" => 0.0,
        "orange" => 30.0,
        "yellow" => 60.0,
        "green" => 120.0,
        "cyan" => 180.0,
        "blue" => 240.0,
        "purple" => 285.0,
        "pink" => 330.0,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorThresholds {
    pub achromatic_saturation: f64,
    pub white_value: f64,
    pub black_value: f64,
}

impl Default for ColorThresholds {
    fn default() -> Self {
        ColorThresholds {
            achromatic_saturation: 0.15,
            white_value: 0.85,
            black_value: 0.25,
        }
    }
}

pub fn hsv_to_color_name(c: Hsv, thr: &ColorThresholds) -> &'static str {
    if c.s < thr.achromatic_saturation {
        return if c.v >= thr.white_value {
            "white"
        } else if c.v < thr.black_value {
            "black"
        } else {
            "gray"
        };
    }
    let h = c.h.rem_euclid(360.0);
    for (name, lo, hi) in HUE_BANDS {
        let inside = if lo > hi { h >= lo || h < hi } else { h >= lo && h < hi };
        if inside {
            return name;
        }
    }
    "red"
}

/// Name of the dominant colour of `pixels`, or `None` for an empty region.
pub fn dominant_color(pixels: &[Rgb], k: usize, seed: u64, thr: &ColorThresholds) -> Option<&'static str> {
    if pixels.is_empty() {
        return None;
    }
    let hsv: Vec<Hsv> = pixels.iter().map(|p| rgb_to_hsv(p[0], p[1], p[2])).collect();
    let clusters = kmeans_hsv(&hsv, k, seed);
    largest_cluster(&clusters).map(|c| hsv_to_color_name(c.centroid, thr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::hsv_to_rgb;

    fn hsv(h: f64, s: f64, v: f64) -> Hsv {
        Hsv { h, s, v }
    }

    #[test]
    fn identical_pixels_single_centroid() {
        let px = vec![hsv(120.0, 1.0, 1.0); 50];
        let cl = kmeans_hsv(&px, 3, 7);
        assert_eq!(cl.len(), 3);
        assert_eq!(cl.iter().map(|c| c.count).sum::<usize>(), 50);
        assert_eq!(largest_cluster(&cl).unwrap().count, 50);
        for c in &cl {
            assert!((c.centroid.h - 120.0).abs() < 1e-9);
            assert!((c.centroid.s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_pixel_three_identical_centroids() {
        let cl = kmeans_hsv(&[hsv(200.0, 0.5, 0.5)], 3, 1);
        assert_eq!(cl.len(), 3);
        assert_eq!(cl.iter().map(|c| c.count).sum::<usize>(), 1);
        for c in &cl {
            assert!((c.centroid.h - 200.0).abs() < 1e-9);
        }
    }

    /// Exhaustive 2-partition of the distinct points minimising SSE.
    fn brute_force_two_means(points: &[[f64; 3]]) -> (f64, Vec<usize>) {
        let mut distinct: Vec<[f64; 3]> = Vec::new();
        for p in points {
            if !distinct.contains(p) {
                distinct.push(*p);
            }
        }
        let n = distinct.len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1..(1u32 << n) - 1 {
            let mut groups = [vec![], vec![]];
            for p in points {
                let i = distinct.iter().position(|d| d == p).unwrap();
                groups[((mask >> i) & 1) as usize].push(*p);
            }
            let sse: f64 = groups
                .iter()
                .map(|g| {
                    let m = [0, 1, 2].map(|d| g.iter().map(|p| p[d]).sum::<f64>() / g.len() as f64);
                    g.iter().map(|p| dist2(p, &m)).sum::<f64>()
                })
                .sum();
            if sse < best.0 {
                let mut counts = vec![groups[0].len(), groups[1].len()];
                counts.sort_unstable();
                best = (sse, counts);
            }
        }
        best
    }

    #[test]
    fn two_colours_sixty_forty() {
        let red = hsv(0.0, 1.0, 1.0);
        let blue = hsv(240.0, 1.0, 1.0);
        let mut px = vec![red; 60];
        px.extend(vec![blue; 40]);
        let embedded: Vec<[f64; 3]> = px.iter().map(embed).collect();
        let (_, oracle_counts) = brute_force_two_means(&embedded);
        assert_eq!(oracle_counts, vec![40, 60]);

        for seed in 0..10 {
            let cl = kmeans_hsv(&px, 2, seed);
            let mut counts: Vec<usize> = cl.iter().map(|c| c.count).collect();
            counts.sort_unstable();
            assert_eq!(counts, oracle_counts);
            let dom = largest_cluster(&cl).unwrap();
            assert_eq!(dom.count, 60);
            assert!(dom.centroid.h.abs() < 1e-6 || (dom.centroid.h - 360.0).abs() < 1e-6);
        }
    }

    #[test]
    fn kmeans_is_seed_deterministic() {
        let px: Vec<Hsv> = (0..200).map(|i| hsv((i * 37 % 360) as f64, 0.8, 0.6)).collect();
        assert_eq!(kmeans_hsv(&px, 3, 42), kmeans_hsv(&px, 3, 42));
    }

    #[test]
    fn red_wraps_around_zero() {
        let px = vec![hsv(358.0, 1.0, 1.0), hsv(2.0, 1.0, 1.0)];
        let cl = kmeans_hsv(&px, 1, 0);
        assert_eq!(hsv_to_color_name(cl[0].centroid, &ColorThresholds::default()), "red");
    }

    #[test]
    fn every_band_at_its_centre() {
        let thr = ColorThresholds::default();
        for name in COLOR_NAMES.iter().take(8) {
            let h = hue_center(name).unwrap();
            let rgb = hsv_to_rgb(hsv(h, 1.0, 0.8));
            let px = vec![rgb; 25];
            assert_eq!(dominant_color(&px, 3, 0, &thr), Some(*name), "hue {h}");
        }
        for (lo, hi, name) in HUE_BANDS.iter().map(|(n, lo, hi)| (*lo, *hi, *n)) {
            let mid = if lo > hi { ((lo + hi + 360.0) / 2.0) % 360.0 } else { (lo + hi) / 2.0 };
            assert_eq!(hsv_to_color_name(hsv(mid, 1.0, 0.8), &thr), name);
        }
        assert_eq!(dominant_color(&[[240, 240, 240]; 4], 3, 0, &thr), Some("white"));
        assert_eq!(dominant_color(&[[128, 128, 128]; 4], 3, 0, &thr), Some("gray"));
        assert_eq!(dominant_color(&[[20, 20, 20]; 4], 3, 0, &thr), Some("black"));
    }

    #[test]
    fn largest_cluster_wins() {
        let thr = ColorThresholds::default();
        let mut px = vec![[0u8, 0, 255]; 70];
        px.extend(vec![[255u8, 255, 0]; 30]);
        assert_eq!(dominant_color(&px, 3, 3, &thr), Some("blue"));
        assert_eq!(dominant_color(&[[255, 0, 0]; 9], 3, 3, &thr), Some("red"));
        assert_eq!(dominant_color(&[], 3, 3, &thr), None);
    }
}
