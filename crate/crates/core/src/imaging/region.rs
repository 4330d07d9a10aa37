use serde::{Deserialize, Serialize};

use super::{BinaryMask, ImagingError, RasterImage};

/// Axis-aligned pixel rectangle; `(x, y)` is the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PixelRect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    /// Grows by `padding` on every side and clamps to a `width × height`
    /// image. `None` when the rectangle does not intersect the image.
    pub fn padded_within(&self, padding: u32, width: u32, height: u32) -> Option<PixelRect> {
        if self.w == 0 || self.h == 0 || self.x >= width || self.y >= height {
            return None;
        }
        let x0 = self.x.saturating_sub(padding);
        let y0 = self.y.saturating_sub(padding);
        let x1 = (u64::from(self.x) + u64::from(self.w) + u64::from(padding)).min(u64::from(width)) as u32;
        let y1 = (u64::from(self.y) + u64::from(self.h) + u64::from(padding)).min(u64::from(height)) as u32;
        Some(PixelRect { x: x0, y: y0, w: x1 - x0, h: y1 - y0 })
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x - self.x < self.w && y - self.y < self.h
    }

    /// Raster order key: top row first, then leftmost.
    pub fn raster_key(&self) -> (u32, u32) {
        (self.y, self.x)
    }
}

/// Minimal rectangle covering every set bit.
pub fn bounding_box(mask: &BinaryMask) -> Result<PixelRect, ImagingError> {
    let mut it = mask.iter_set();
    let (fx, fy) = it.next().ok_or(ImagingError::EmptyMask)?;
    let (mut x0, mut x1, mut y0, mut y1) = (fx, fx, fy, fy);
    for (x, y) in it {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    Ok(PixelRect { x: x0, y: y0, w: x1 - x0 + 1, h: y1 - y0 + 1 })
}

/// Copies `rect` grown by `padding`, clamped to the image bounds.
pub fn crop(img: &RasterImage, rect: PixelRect, padding: u32) -> Result<RasterImage, ImagingError> {
    let r = rect.padded_within(padding, img.width(), img.height()).ok_or(ImagingError::RectOutOfBounds)?;
    let stride = img.width() as usize * 4;
    let mut data = Vec::with_capacity(r.w as usize * r.h as usize * 4);
    for y in r.y..r.y + r.h {
        let start = y as usize * stride + r.x as usize * 4;
        data.extend_from_slice(&img.as_bytes()[start..start + r.w as usize * 4]);
    }
    RasterImage::from_rgba(r.w, r.h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn gradient(w: u32, h: u32) -> RasterImage {
        let mut img = RasterImage::new(w, h, [0; 4]).unwrap();
        for y in 0..h {
            for x in 0..w {
                img.put(x, y, [x as u8, y as u8, (x * 7 + y * 3) as u8, 255]);
            }
        }
        img
    }

    #[test]
    fn bbox_examples() {
        let mut m = BinaryMask::new(10, 10);
        m.set(3, 7, true);
        assert_eq!(bounding_box(&m).unwrap(), PixelRect::new(3, 7, 1, 1));
        let mut m = BinaryMask::new(10, 10);
        m.set(1, 1, true);
        m.set(4, 6, true);
        assert_eq!(bounding_box(&m).unwrap(), PixelRect::new(1, 1, 4, 6));
        assert_eq!(bounding_box(&BinaryMask::new(3, 3)), Err(ImagingError::EmptyMask));
    }

    #[test]
    fn bbox_matches_scan_on_random_masks() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let m = BinaryMask::from_fn(20, 20, |_, _| rng.gen_bool(0.05));
            if m.is_empty() {
                continue;
            }
            let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
            for y in 0..20 {
                for x in 0..20 {
                    if m.get(x, y) {
                        x0 = x0.min(x);
                        y0 = y0.min(y);
                        x1 = x1.max(x);
                        y1 = y1.max(y);
                    }
                }
            }
            assert_eq!(bounding_box(&m).unwrap(), PixelRect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1));
        }
    }

    #[test]
    fn crop_identity_and_corner() {
        let img = gradient(4, 4);
        assert_eq!(crop(&img, PixelRect::new(0, 0, 4, 4), 0).unwrap(), img);
        let c = crop(&img, PixelRect::new(0, 0, 2, 2), 0).unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(c.get(x, y), img.get(x, y));
            }
        }
    }

    #[test]
    fn crop_near_edge_is_clamped() {
        let img = gradient(30, 20);
        let rect = PixelRect::new(26, 1, 3, 4);
        let c = crop(&img, rect, 5).unwrap();
        // clamped window: x in [21, 30), y in [0, 10)
        assert_eq!((c.width(), c.height()), (9, 10));
        for y in 0..c.height() {
            for x in 0..c.width() {
                assert_eq!(c.get(x, y), img.get(21 + x, y));
            }
        }
    }

    #[test]
    fn crop_out_of_bounds() {
        let img = gradient(5, 5);
        assert_eq!(crop(&img, PixelRect::new(5, 0, 2, 2), 3), Err(ImagingError::RectOutOfBounds));
        assert_eq!(crop(&img, PixelRect::new(0, 9, 2, 2), 0), Err(ImagingError::RectOutOfBounds));
    }
}
