//! Instance segmentation stage: a backend-agnostic interface, confidence and
//! zone filtering, per-object isolation and the base64 payload encoding.

mod external;
mod payload;
mod reference;
pub mod rle;

pub use external::{HttpSegmenter, WireDetection, WireDetectRequest, WireDetectResponse};
pub use payload::{decode_payload, encode_image_payload, encode_payload, ObjectPayload};
pub use reference::{hue_label, ReferenceSegmenter, NAMED_HUES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{bounding_box, crop, BinaryMask, ImagingError, PixelRect, RasterImage};
use crate::lasso::{mask_inside_fraction, LassoPolygon};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("detector backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("detector backend timed out after {0} ms")]
    BackendTimeout(u64),
    #[error("malformed detector response: {0}")]
    MalformedBackendResponse(String),
    #[error("mask has no set bits")]
    EmptyMask,
    #[error("payload encoding failed: {0}")]
    EncodingFailure(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorBackendKind {
    External,
    #[default]
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub confidence_threshold: f64,
    pub backend: DetectorBackendKind,
    pub external_url: Option<String>,
    pub timeout_ms: u64,
    pub crop_padding_px: u32,
    /// Minimum share of an object's mask inside the zone.
    pub zone_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.5,
            backend: DetectorBackendKind::Reference,
            external_url: None,
            timeout_ms: 30_000,
            crop_padding_px: 4,
            zone_fraction: 0.5,
        }
    }
}

impl DetectorConfig {
    /// Threshold clamped into `[0, 1]`.
    pub fn threshold(&self) -> f64 {
        if self.confidence_threshold.is_nan() {
            return 0.5;
        }
        self.confidence_threshold.clamp(0.0, 1.0)
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.confidence_threshold = t;
        self.confidence_threshold = self.threshold();
        self
    }
}

/// One instance as reported by a backend, mask in the backend's input frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDetection {
    pub label: String,
    pub confidence: f64,
    pub mask: BinaryMask,
}

#[derive(Debug, Clone, Default)]
pub struct BackendOutput {
    pub detections: Vec<RawDetection>,
    /// Backend-reported inference time, passed through to metrics.
    pub latency_ms: Option<u64>,
}

pub trait SegmentationBackend: Send + Sync {
    fn name(&self) -> &str;
    fn infer(&self, img: &RasterImage) -> Result<BackendOutput, DetectionError>;
}

/// A segmented object with its isolated, transparent-background crop.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedObject {
    pub id: String,
    pub label: String,
    pub confidence: f64,
    pub bbox: PixelRect,
    /// Full-frame coordinates.
    pub mask: BinaryMask,
    pub crop: RasterImage,
}

#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub objects: Vec<DetectedObject>,
    pub backend_latency_ms: Option<u64>,
    /// Window of the frame handed to the backend.
    pub window: Option<PixelRect>,
}

/// Crops `bbox(mask) + padding`; pixels under the mask keep their colour and
/// become opaque, all others get alpha 0.
pub fn isolate_object(img: &RasterImage, mask: &BinaryMask, padding: u32) -> Result<RasterImage, DetectionError> {
    if mask.width() != img.width() || mask.height() != img.height() {
        return Err(ImagingError::SizeMismatch {
            mask_w: mask.width(),
            mask_h: mask.height(),
            img_w: img.width(),
            img_h: img.height(),
        }
        .into());
    }
    let bbox = bounding_box(mask).map_err(|_| DetectionError::EmptyMask)?;
    let window = bbox.padded_within(padding, img.width(), img.height()).expect("bbox lies inside the image");
    let mut out = crop(img, bbox, padding)?;
    for y in 0..window.h {
        for x in 0..window.w {
            let [r, g, b, _] = out.get(x, y);
            let alpha = if mask.get(window.x + x, window.y + y) { 255 } else { 0 };
            out.put(x, y, [r, g, b, alpha]);
        }
    }
    Ok(out)
}

/// Moves a mask computed on `window` back into full-frame coordinates.
fn place_mask(local: &BinaryMask, window: PixelRect, width: u32, height: u32) -> BinaryMask {
    let mut full = BinaryMask::new(width, height);
    for (x, y) in local.iter_set() {
        full.set(window.x + x, window.y + y, true);
    }
    full
}

fn zone_window(zone: &LassoPolygon, padding: u32, width: u32, height: u32) -> Option<PixelRect> {
    let (x0, y0, x1, y1) = zone.bounds();
    let x0 = x0.ceil().max(0.0);
    let y0 = y0.ceil().max(0.0);
    let x1 = x1.floor().min(f64::from(width) - 1.0);
    let y1 = y1.floor().min(f64::from(height) - 1.0);
    if x1 < x0 || y1 < y0 {
        return None;
    }
    let rect = PixelRect::new(x0 as u32, y0 as u32, (x1 - x0) as u32 + 1, (y1 - y0) as u32 + 1);
    rect.padded_within(padding, width, height)
}

/// Runs the backend and filters its output.
///
/// With a zone, the backend sees only the zone's bounding window (padded by
/// `crop_padding_px`); masks are mapped back to the full frame and objects
/// whose inside fraction is below `zone_fraction` are dropped. A zone lying
/// entirely outside the frame yields no objects. Results are ordered by
/// descending confidence, then bounding-box raster order.
pub fn segment(
    img: &RasterImage,
    zone: Option<&LassoPolygon>,
    cfg: &DetectorConfig,
    backend: &dyn SegmentationBackend,
) -> Result<Segmentation, DetectionError> {
    let (w, h) = (img.width(), img.height());
    let window = match zone {
        Some(z) => match zone_window(z, cfg.crop_padding_px, w, h) {
            Some(win) => Some(win),
            None => return Ok(Segmentation::default()),
        },
        None => None,
    };
    let input = match window {
        Some(win) => crop(img, win, 0)?,
        None => img.clone(),
    };
    let output = backend.infer(&input)?;
    let threshold = cfg.threshold();

    let mut objects = Vec::new();
    for det in output.detections {
        if !(0.0..=1.0).contains(&det.confidence) {
            return Err(DetectionError::MalformedBackendResponse(format!(
                "confidence {} outside [0, 1]",
                det.confidence
            )));
        }
        if det.mask.width() != input.width() || det.mask.height() != input.height() {
            return Err(DetectionError::MalformedBackendResponse(format!(
                "mask is {}x{}, input was {}x{}",
                det.mask.width(),
                det.mask.height(),
                input.width(),
                input.height()
            )));
        }
        if det.confidence < threshold || det.mask.is_empty() {
            continue;
        }
        let mask = match window {
            Some(win) => place_mask(&det.mask, win, w, h),
            None => det.mask,
        };
        if let Some(z) = zone {
            let fraction = mask_inside_fraction(z, &mask).map_err(|_| DetectionError::EmptyMask)?;
            if fraction < cfg.zone_fraction {
                continue;
            }
        }
        let bbox = bounding_box(&mask)?;
        let crop = isolate_object(img, &mask, cfg.crop_padding_px)?;
        objects.push(DetectedObject {
            id: uuid::Uuid::new_v4().simple().to_string(),
            label: det.label,
            confidence: det.confidence,
            bbox,
            mask,
            crop,
        });
    }
    objects.sort_by(|a, b| {
        b.confidence.total_cmp(&a.confidence).then_with(|| a.bbox.raster_key().cmp(&b.bbox.raster_key()))
    });
    Ok(Segmentation { objects, backend_latency_ms: output.latency_ms, window })
}
