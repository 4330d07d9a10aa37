use serde::{Deserialize, Serialize};

use super::{BinaryMask, RasterImage, Rgba};

/// Hexcone HSV. `h` in degrees `[0, 360)`, `s` and `v` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Alpha is ignored. Hue is 0 for achromatic pixels.
pub fn rgb_to_hsv(p: Rgba) -> HsvPixel {
    let r = f64::from(p[0]) / 255.0;
    let g = f64::from(p[1]) / 255.0;
    let b = f64::from(p[2]) / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let chroma = max - min;
    let v = max;
    let s = if max > 0.0 { chroma / max } else { 0.0 };
    if chroma == 0.0 {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let sector = if max == r {
        ((g - b) / chroma).rem_euclid(6.0)
    } else if max == g {
        (b - r) / chroma + 2.0
    } else {
        (r - g) / chroma + 4.0
    };
    let mut h = 60.0 * sector;
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvPixel { h, s, v }
}

pub fn hsv_to_rgb(p: HsvPixel) -> [u8; 3] {
    let c = p.v * p.s;
    let hp = p.h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = p.v - c;
    let q = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Inclusive hue interval in degrees. `lo > hi` wraps through 0°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HueRange {
    pub lo: f64,
    pub hi: f64,
}

impl HueRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, h: f64) -> bool {
        if self.lo <= self.hi {
            h >= self.lo && h <= self.hi
        } else {
            h >= self.lo || h <= self.hi
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorMaskParams {
    pub hue_ranges: Vec<HueRange>,
    pub s_min: f64,
    pub v_min: f64,
}

impl ColorMaskParams {
    /// Stroke red: hue in [0°, 10°] or [350°, 360°), s ≥ 0.5, v ≥ 0.3.
    pub fn red() -> Self {
        Self { hue_ranges: vec![HueRange::new(0.0, 10.0), HueRange::new(350.0, 360.0)], s_min: 0.5, v_min: 0.3 }
    }

    pub fn matches(&self, hsv: HsvPixel) -> bool {
        hsv.s >= self.s_min && hsv.v >= self.v_min && self.hue_ranges.iter().any(|r| r.contains(hsv.h))
    }
}

impl Default for ColorMaskParams {
    fn default() -> Self {
        Self::red()
    }
}

pub fn color_mask(img: &RasterImage, params: &ColorMaskParams) -> BinaryMask {
    let bits = img.pixels().map(|p| params.matches(rgb_to_hsv(p))).collect();
    BinaryMask::from_bits(img.width(), img.height(), bits).expect("one bit per pixel")
}
