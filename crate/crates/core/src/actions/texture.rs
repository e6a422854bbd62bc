//! a3: texture from a uniform LBP histogram and grey-level co-occurrence
//! statistics, both computed on the HSV value channel.

/// Grey levels used for the co-occurrence matrix.
pub const GLCM_LEVELS: usize = 8;

/// Row-major single-channel patch.
#[derive(Debug, Clone)]
pub struct GrayPatch {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayPatch {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height, "patch size mismatch");
        GrayPatch {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        GrayPatch::new(width, height, data)
    }

    fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Neighbour offsets in circular order starting at the top-left.
const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

pub fn lbp_code(patch: &GrayPatch, x: usize, y: usize) -> u8 {
    let c = patch.at(x, y);
    let mut code = 0u8;
    for (bit, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
        let nx = (x as isize + dx) as usize;
        let ny = (y as isize + dy) as usize;
        if patch.at(nx, ny) >= c {
            code |= 1 << bit;
        }
    }
    code
}

/// Number of 0/1 transitions around the circular 8-bit pattern.
pub fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_left(1)).count_ones()
}

/// Rotation-invariant uniform LBP histogram over interior pixels: bins 0..=8
/// count uniform patterns by number of set bits, bin 9 collects the rest.
/// Normalised to sum to 1; all-zero if the patch has no interior.
pub fn lbp_uniform_histogram(patch: &GrayPatch) -> [f64; 10] {
    let mut hist = [0.0; 10];
    if patch.width < 3 || patch.height < 3 {
        return hist;
    }
    let mut n = 0.0;
    for y in 1..patch.height - 1 {
        for x in 1..patch.width - 1 {
            let code = lbp_code(patch, x, y);
            let bin = if transitions(code) <= 2 {
                code.count_ones() as usize
            } else {
                9
            };
            hist[bin] += 1.0;
            n += 1.0;
        }
    }
    hist.iter_mut().for_each(|h| *h /= n);
    hist
}

pub fn quantize(v: u8) -> usize {
    usize::from(v) * GLCM_LEVELS / 256
}

/// Normalised co-occurrence matrix for displacement `(dx, dy)`.
pub fn glcm(patch: &GrayPatch, dx: usize, dy: usize) -> [[f64; GLCM_LEVELS]; GLCM_LEVELS] {
    let mut m = [[0.0; GLCM_LEVELS]; GLCM_LEVELS];
    let mut n = 0.0;
    for y in 0..patch.height.saturating_sub(dy) {
        for x in 0..patch.width.saturating_sub(dx) {
            let i = quantize(patch.at(x, y));
            let j = quantize(patch.at(x + dx, y + dy));
            m[i][j] += 1.0;
            n += 1.0;
        }
    }
    if n > 0.0 {
        m.iter_mut().flatten().for_each(|v| *v /= n);
    }
    m
}

pub fn glcm_contrast(m: &[[f64; GLCM_LEVELS]; GLCM_LEVELS]) -> f64 {
    let mut c = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            c += p * (i as f64 - j as f64).powi(2);
        }
    }
    c
}

pub fn glcm_homogeneity(m: &[[f64; GLCM_LEVELS]; GLCM_LEVELS]) -> f64 {
    let mut h = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            h += p / (1.0 + (i as f64 - j as f64).abs());
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextureFeatures {
    pub lbp_histogram: [f64; 10],
    /// Contrast at offset (1, 0).
    pub contrast: f64,
    /// Contrast at offset (0, 1).
    pub contrast_vertical: f64,
    pub homogeneity: f64,
}

impl TextureFeatures {
    pub fn uniform_fraction(&self) -> f64 {
        1.0 - self.lbp_histogram[9]
    }

    /// Ratio of the larger to the smaller directional contrast.
    pub fn directional_ratio(&self) -> f64 {
        let hi = self.contrast.max(self.contrast_vertical);
        let lo = self.contrast.min(self.contrast_vertical);
        if hi == 0.0 {
            1.0
        } else if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

pub fn texture_features(patch: &GrayPatch) -> TextureFeatures {
    let h = glcm(patch, 1, 0);
    let v = glcm(patch, 0, 1);
    TextureFeatures {
        lbp_histogram: lbp_uniform_histogram(patch),
        contrast: glcm_contrast(&h),
        contrast_vertical: glcm_contrast(&v),
        homogeneity: glcm_homogeneity(&h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureThresholds {
    pub smooth_contrast: f64,
    pub striped_ratio: f64,
    pub patterned_uniform: f64,
}

impl Default for TextureThresholds {
    fn default() -> Self {
        TextureThresholds {
            smooth_contrast: 0.05,
            striped_ratio: 3.0,
            patterned_uniform: 0.8,
        }
    }
}

pub const TEXTURE_NAMES: [&str; 4] = ["smooth", "rough", "patterned", "striped"];

/// Rules in order: smooth, striped, patterned, otherwise rough.
pub fn classify_texture(f: &TextureFeatures, thr: &TextureThresholds) -> &'static str {
    if f.contrast < thr.smooth_contrast {
        "smooth"
    } else if f.directional_ratio() > thr.striped_ratio {
        "striped"
    } else if f.uniform_fraction() > thr.patterned_uniform {
        "patterned"
    } else {
        "rough"
    }
}
