//! Frame-level capture: derive the zone (from a stroke or from the red line
//! drawn in the frame) and segment the objects inside it.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{segment, DetectionError, DetectorConfig, Segmentation, SegmentationBackend};
use crate::imaging::{color_mask, largest_contour, significant_contours, ColorMaskParams, RasterImage};
use crate::lasso::{close_stroke, LassoConfig, LassoError, LassoPolygon, Stroke};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaptureError {
    #[error("no stroke given and no red line found in the frame")]
    NoZone,
    #[error(transparent)]
    Lasso(#[from] LassoError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaptureConfig {
    pub lasso: LassoConfig,
    pub detector: DetectorConfig,
    pub stroke_color: ColorMaskParams,
    /// Red components smaller than this (px) are ignored as noise.
    pub min_line_area: u64,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self {
            lasso: LassoConfig::default(),
            detector: DetectorConfig::default(),
            stroke_color: ColorMaskParams::red(),
            min_line_area: 25,
        }
    }
}

/// Zone traced by the outer contour of the largest stroke-coloured region.
pub fn zone_from_line(img: &RasterImage, cfg: &CaptureConfig) -> Result<LassoPolygon, CaptureError> {
    let mask = color_mask(img, &cfg.stroke_color);
    let contours = significant_contours(&mask, cfg.min_line_area);
    let outer = largest_contour(&contours).map_err(|_| CaptureError::NoZone)?;
    let points: Vec<_> = outer.points.iter().map(|p| (f64::from(p.x), f64::from(p.y))).collect();
    Ok(close_stroke(&Stroke::from_points(&points)?, &cfg.lasso)?)
}

#[derive(Debug, Clone)]
pub struct ZoneCapture {
    pub zone: LassoPolygon,
    pub segmentation: Segmentation,
    /// Zone closing, cropping, segmentation and isolation together.
    pub detection_ms: u64,
}

/// Uses `stroke` when it has points, otherwise the line drawn in the frame.
pub fn capture_zone(
    img: &RasterImage,
    stroke: Option<&Stroke>,
    cfg: &CaptureConfig,
    backend: &dyn SegmentationBackend,
) -> Result<ZoneCapture, CaptureError> {
    let started = Instant::now();
    let zone = match stroke.filter(|s| !s.is_empty()) {
        Some(s) => close_stroke(s, &cfg.lasso)?,
        None => zone_from_line(img, cfg)?,
    };
    let segmentation = segment(img, Some(&zone), &cfg.detector, backend)?;
    Ok(ZoneCapture { zone, segmentation, detection_ms: started.elapsed().as_millis() as u64 })
}

/// Whole-frame capture; returns the segmentation and its duration in ms.
pub fn capture_all(
    img: &RasterImage,
    cfg: &CaptureConfig,
    backend: &dyn SegmentationBackend,
) -> Result<(Segmentation, u64), CaptureError> {
    let started = Instant::now();
    let segmentation = segment(img, None, &cfg.detector, backend)?;
    Ok((segmentation, started.elapsed().as_millis() as u64))
}
