use std::io::Cursor;

use super::{ImagingError, RasterImage};

/// Decodes any 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) into RGBA.
/// 16-bit samples are stripped to their high byte.
pub fn decode_png(bytes: &[u8]) -> Result<RasterImage, ImagingError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| ImagingError::Png(e.to_string()))?;
    let size = reader.output_buffer_size().ok_or_else(|| ImagingError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| ImagingError::Png(e.to_string()))?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width, info.height);
    let rgba = match info.color_type {
        png::ColorType::Rgba => buf,
        png::ColorType::Rgb => buf.chunks_exact(3).flat_map(|c| [c[0], c[1], c[2], 255]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|c| [c[0], c[0], c[0], c[1]]).collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g, 255]).collect(),
        png::ColorType::Indexed => return Err(ImagingError::Png("palette was not expanded".into())),
    };
    RasterImage::from_rgba(w, h, rgba)
}

/// Encodes as 8-bit RGBA, non-interlaced.
pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, ImagingError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width(), img.height());
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| ImagingError::Png(e.to_string()))?;
        writer.write_image_data(img.as_bytes()).map_err(|e| ImagingError::Png(e.to_string()))?;
        writer.finish().map_err(|e| ImagingError::Png(e.to_string()))?;
    }
    Ok(out)
}
