//! Raster primitives: RGBA images, binary masks, HSV masking, contour
//! extraction, polygon fill, bounding boxes and cropping.
//!
//! Pixel `(x, y)` has its center at the integer coordinate `(x, y)`; polygon
//! fill and contour coordinates share that convention, so a contour traced
//! from a mask rasterizes back onto the same pixels.

mod codec;
mod contour;
mod hsv;
mod polygon;
mod region;

pub use codec::{decode_png, encode_png};
pub use contour::{extract_contours, filled_components, largest_contour, significant_contours, Contour, FilledComponent, PixelPoint};
pub use hsv::{color_mask, hsv_to_rgb, rgb_to_hsv, ColorMaskParams, HsvPixel, HueRange};
pub use polygon::{point_on_segment, rasterize_polygon, shoelace_area};
pub use region::{bounding_box, crop, PixelRect};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImagingError {
    #[error("invalid image dimensions {width}x{height} for {len} bytes")]
    InvalidDimensions { width: u32, height: u32, len: usize },
    #[error("contour set is empty")]
    EmptyContourSet,
    #[error("polygon is degenerate (fewer than 3 points or zero area)")]
    DegeneratePolygon,
    #[error("mask has no set bits")]
    EmptyMask,
    #[error("rectangle does not intersect the image")]
    RectOutOfBounds,
    #[error("mask is {mask_w}x{mask_h}, image is {img_w}x{img_h}")]
    SizeMismatch { mask_w: u32, mask_h: u32, img_w: u32, img_h: u32 },
    #[error("png: {0}")]
    Png(String),
}

pub type Rgba = [u8; 4];

/// Row-major RGBA raster, 8 bits per channel.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage").field("width", &self.width).field("height", &self.height).finish()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: Rgba) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidDimensions { width, height, len: 0 });
        }
        let data = fill.iter().copied().cycle().take(width as usize * height as usize * 4).collect();
        Ok(Self { width, height, data })
    }

    pub fn from_rgba(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize * 4 {
            return Err(ImagingError::InvalidDimensions { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 4
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgba {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2], self.data[o + 3]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, px: Rgba) {
        let o = self.offset(x, y);
        self.data[o..o + 4].copy_from_slice(&px);
    }

    pub fn pixels(&self) -> impl Iterator<Item = Rgba> + '_ {
        self.data.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]])
    }

    /// Nearest-neighbour downscale so that neither side exceeds `max_side`.
    /// Images already within the limit are returned unchanged.
    pub fn fit_within(&self, max_side: u32) -> RasterImage {
        let longest = self.width.max(self.height);
        if longest <= max_side || max_side == 0 {
            return self.clone();
        }
        let scale = f64::from(max_side) / f64::from(longest);
        let w = ((f64::from(self.width) * scale).round() as u32).max(1);
        let h = ((f64::from(self.height) * scale).round() as u32).max(1);
        let mut out = RasterImage::new(w, h, [0; 4]).expect("non-zero dims");
        for y in 0..h {
            let sy = ((u64::from(y) * u64::from(self.height)) / u64::from(h)) as u32;
            for x in 0..w {
                let sx = ((u64::from(x) * u64::from(self.width)) / u64::from(w)) as u32;
                out.put(x, y, self.get(sx, sy));
            }
        }
        out
    }
}

/// One bit per pixel, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("set", &self.count())
            .finish()
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, ImagingError> {
        if bits.len() != width as usize * height as usize {
            return Err(ImagingError::InvalidDimensions { width, height, len: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as u64) < u64::from(self.width) && (y as u64) < u64::from(self.height) && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Coordinates of set bits in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| ((i as u32) % w, (i as u32) / w))
    }
}
