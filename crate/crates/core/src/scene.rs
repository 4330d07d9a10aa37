//! Synthetic capture frames: flat background, saturated discs and an
//! optional red elliptical ring standing in for a drawn lasso.

use serde::{Deserialize, Serialize};

use crate::imaging::{hsv_to_rgb, HsvPixel, RasterImage, Rgba};
use crate::lasso::Point;

pub const STROKE_RED: Rgba = [255, 0, 0, 255];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center: Point,
    pub radius: f64,
    /// Degrees.
    pub hue: f64,
}

impl Blob {
    pub fn color(&self) -> Rgba {
        let [r, g, b] = hsv_to_rgb(HsvPixel { h: self.hue, s: 0.85, v: 0.9 });
        [r, g, b, 255]
    }

    pub fn contains(&self, p: Point) -> bool {
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub center: Point,
    pub rx: f64,
    pub ry: f64,
    pub thickness: f64,
}

impl Ring {
    /// `n` points along the centre line, clockwise on screen from 3 o'clock.
    pub fn stroke_points(&self, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                (self.center.0 + self.rx * t.cos(), self.center.1 + self.ry * t.sin())
            })
            .collect()
    }

    /// Pixel lies within `thickness / 2` of the centre line, measured along
    /// the normalized radius.
    fn covers(&self, p: Point) -> bool {
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        let r = ((dx / self.rx).powi(2) + (dy / self.ry).powi(2)).sqrt();
        let half = self.thickness / 2.0 / self.rx.min(self.ry);
        (r - 1.0).abs() <= half
    }

    /// Whether a point is strictly inside the centre line.
    pub fn encloses(&self, p: Point) -> bool {
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        (dx / self.rx).powi(2) + (dy / self.ry).powi(2) < 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub background: Rgba,
    pub blobs: Vec<Blob>,
    pub ring: Option<Ring>,
}

impl Scene {
    /// Later blobs paint over earlier ones; the ring is painted last.
    pub fn render(&self) -> RasterImage {
        let mut img = RasterImage::new(self.width, self.height, self.background).expect("non-zero scene size");
        for y in 0..self.height {
            for x in 0..self.width {
                let p = (f64::from(x), f64::from(y));
                if let Some(b) = self.blobs.iter().rev().find(|b| b.contains(p)) {
                    img.put(x, y, b.color());
                }
                if self.ring.is_some_and(|r| r.covers(p)) {
                    img.put(x, y, STROKE_RED);
                }
            }
        }
        img
    }
}

/// 640×480 frame: green, blue and yellow discs, the ring around the first two.
pub fn demo_scene() -> Scene {
    Scene {
        width: 640,
        height: 480,
        background: [200, 200, 200, 255],
        blobs: vec![
            Blob { center: (160.0, 240.0), radius: 50.0, hue: 120.0 },
            Blob { center: (330.0, 230.0), radius: 45.0, hue: 240.0 },
            Blob { center: (530.0, 250.0), radius: 45.0, hue: 60.0 },
        ],
        ring: Some(Ring { center: (245.0, 235.0), rx: 160.0, ry: 110.0, thickness: 4.0 }),
    }
}
