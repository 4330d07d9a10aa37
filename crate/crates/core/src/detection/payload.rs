use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{DetectedObject, DetectionError};
use crate::imaging::{decode_png, encode_png, RasterImage};

/// An isolated object as it travels over the API: PNG bytes, base64
/// (standard alphabet, padded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectPayload {
    pub label: String,
    pub png_base64: String,
    pub width_px: u32,
    pub height_px: u32,
}

pub fn encode_payload(obj: &DetectedObject) -> Result<ObjectPayload, DetectionError> {
    encode_image_payload(&obj.label, &obj.crop)
}

pub fn encode_image_payload(label: &str, img: &RasterImage) -> Result<ObjectPayload, DetectionError> {
    let png = encode_png(img).map_err(|e| DetectionError::EncodingFailure(e.to_string()))?;
    Ok(ObjectPayload {
        label: label.to_string(),
        png_base64: STANDARD.encode(png),
        width_px: img.width(),
        height_px: img.height(),
    })
}

/// Decodes and checks the stated dimensions.
pub fn decode_payload(p: &ObjectPayload) -> Result<RasterImage, DetectionError> {
    let bytes = STANDARD
        .decode(p.png_base64.as_bytes())
        .map_err(|e| DetectionError::EncodingFailure(format!("base64: {e}")))?;
    let img = decode_png(&bytes).map_err(|e| DetectionError::EncodingFailure(e.to_string()))?;
    if (img.width(), img.height()) != (p.width_px, p.height_px) {
        return Err(DetectionError::EncodingFailure(format!(
            "payload says {}x{}, png is {}x{}",
            p.width_px,
            p.height_px,
            img.width(),
            img.height()
        )));
    }
    Ok(img)
}
