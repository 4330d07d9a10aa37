//! Deterministic colour-blob segmenter used when no neural backend is
//! configured. Saturated, reasonably bright pixels that are not stroke red
//! form 8-connected components; each component becomes one object with
//! confidence 1.0, labelled by its mean hue.

use super::{BackendOutput, DetectionError, RawDetection, SegmentationBackend};
use crate::imaging::{filled_components, rgb_to_hsv, BinaryMask, ColorMaskParams, RasterImage};

/// Twelve named hues, 30° apart.
pub const NAMED_HUES: [(&str, f64); 12] = [
    ("red", 0.0),
    ("orange", 30.0),
    ("yellow", 60.0),
    ("chartreuse", 90.0),
    ("green", 120.0),
    ("spring green", 150.0),
    ("cyan", 180.0),
    ("azure", 210.0),
    ("blue", 240.0),
    ("violet", 270.0),
    ("magenta", 300.0),
    ("rose", 330.0),
];

fn hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Nearest named hue by circular distance.
pub fn hue_label(h: f64) -> &'static str {
    NAMED_HUES
        .iter()
        .min_by(|a, b| hue_distance(h, a.1).total_cmp(&hue_distance(h, b.1)))
        .map(|(name, _)| *name)
        .expect("table is non-empty")
}

#[derive(Debug, Clone)]
pub struct ReferenceSegmenter {
    pub s_min: f64,
    pub v_min: f64,
    /// Pixels matching these ranges belong to the user's stroke, not objects.
    pub stroke: ColorMaskParams,
}

impl Default for ReferenceSegmenter {
    fn default() -> Self {
        Self { s_min: 0.4, v_min: 0.3, stroke: ColorMaskParams::red() }
    }
}

impl ReferenceSegmenter {
    pub fn new(stroke: ColorMaskParams) -> Self {
        Self { stroke, ..Default::default() }
    }

    pub fn segment_blobs(&self, img: &RasterImage) -> Vec<RawDetection> {
        let hsv: Vec<_> = img.pixels().map(rgb_to_hsv).collect();
        let bits = hsv.iter().map(|p| p.s >= self.s_min && p.v >= self.v_min && !self.stroke.matches(*p)).collect();
        let fg = BinaryMask::from_bits(img.width(), img.height(), bits).expect("one bit per pixel");
        filled_components(&fg)
            .into_iter()
            .map(|c| {
                // circular mean of hue over the component
                let (mut sx, mut sy) = (0.0, 0.0);
                for (x, y) in c.pixels.iter_set() {
                    let h = hsv[y as usize * img.width() as usize + x as usize].h.to_radians();
                    sx += h.cos();
                    sy += h.sin();
                }
                let mean = sy.atan2(sx).to_degrees().rem_euclid(360.0);
                RawDetection { label: hue_label(mean).to_string(), confidence: 1.0, mask: c.pixels }
            })
            .collect()
    }
}

impl SegmentationBackend for ReferenceSegmenter {
    fn name(&self) -> &str {
        "reference"
    }

    fn infer(&self, img: &RasterImage) -> Result<BackendOutput, DetectionError> {
        Ok(BackendOutput { detections: self.segment_blobs(img), latency_ms: None })
    }
}
