//! Outer-border following over 8-connected components.
//!
//! Components are labelled in raster order; each component's outer border is
//! traced from its first raster pixel with the Suzuki–Abe border-following
//! step. Holes are not traced, but they count toward the enclosed area.

use std::collections::VecDeque;

use super::{BinaryMask, ImagingError, PixelRect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

/// Closed outer boundary of one component. `area` is the number of pixels
/// enclosed by the boundary (component pixels plus any holes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<PixelPoint>,
    pub area: u64,
}

impl Contour {
    /// First point of the trace, which is the component's first raster pixel.
    pub fn start(&self) -> PixelPoint {
        self.points[0]
    }
}

/// A labelled component with its boundary and hole-filled extent.
#[derive(Debug, Clone)]
pub struct FilledComponent {
    pub contour: Vec<PixelPoint>,
    /// Component pixels only, full-frame.
    pub pixels: BinaryMask,
    /// Component pixels plus enclosed holes, full-frame.
    pub filled: BinaryMask,
    pub pixel_count: u64,
    pub filled_area: u64,
    pub bbox: PixelRect,
}

// Clockwise on screen (y grows downward), starting east.
const DIRS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

fn dir_index(from: PixelPoint, to: PixelPoint) -> usize {
    let d = (to.x - from.x, to.y - from.y);
    DIRS.iter().position(|&v| v == d).expect("points are 8-neighbours")
}

/// Labels 8-connected components; returns the label image (0 = background)
/// and each component's pixel list in discovery order.
fn label_components(mask: &BinaryMask) -> (Vec<u32>, Vec<Vec<PixelPoint>>) {
    let (w, h) = (mask.width() as i32, mask.height() as i32);
    let mut labels = vec![0u32; mask.bits().len()];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for (i, &bit) in mask.bits().iter().enumerate() {
        if !bit || labels[i] != 0 {
            continue;
        }
        let label = comps.len() as u32 + 1;
        let mut pixels = Vec::new();
        labels[i] = label;
        queue.push_back(PixelPoint::new(i as i32 % w, i as i32 / w));
        while let Some(p) = queue.pop_front() {
            pixels.push(p);
            for (dx, dy) in DIRS {
                let (nx, ny) = (p.x + dx, p.y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if mask.bits()[j] && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(PixelPoint::new(nx, ny));
                }
            }
        }
        comps.push(pixels);
    }
    (labels, comps)
}

fn trace_outer_border(start: PixelPoint, is_fg: impl Fn(PixelPoint) -> bool) -> Vec<PixelPoint> {
    let step = |p: PixelPoint, d: usize| PixelPoint::new(p.x + DIRS[d].0, p.y + DIRS[d].1);

    // The start pixel is the first in raster order, so its west neighbour is
    // background. Search clockwise from there for the last border pixel.
    let west = 4;
    let Some(first) = (0..8).map(|k| (west + k) % 8).find(|&d| is_fg(step(start, d))) else {
        return vec![start];
    };
    let last = step(start, first);

    let mut points = vec![start];
    let mut prev = last;
    let mut cur = start;
    loop {
        // counter-clockwise around `cur`, beginning just after `prev`
        let from = dir_index(cur, prev);
        let next = (1..=8)
            .map(|k| (from + 8 - k) % 8)
            .map(|d| step(cur, d))
            .find(|&q| is_fg(q))
            .expect("component has at least two pixels");
        if next == start && cur == last {
            break;
        }
        points.push(next);
        prev = cur;
        cur = next;
    }
    points
}

fn bbox_of(points: &[PixelPoint]) -> PixelRect {
    let min_x = points.iter().map(|p| p.x).min().unwrap();
    let max_x = points.iter().map(|p| p.x).max().unwrap();
    let min_y = points.iter().map(|p| p.y).min().unwrap();
    let max_y = points.iter().map(|p| p.y).max().unwrap();
    PixelRect { x: min_x as u32, y: min_y as u32, w: (max_x - min_x + 1) as u32, h: (max_y - min_y + 1) as u32 }
}

/// Component plus holes: everything inside the padded bounding box that the
/// outside background cannot reach through 4-connected non-component pixels.
fn fill_holes(labels: &[u32], label: u32, width: u32, height: u32, bbox: PixelRect) -> BinaryMask {
    let x0 = i64::from(bbox.x) - 1;
    let y0 = i64::from(bbox.y) - 1;
    let rw = i64::from(bbox.w) + 2;
    let rh = i64::from(bbox.h) + 2;
    let is_wall = |x: i64, y: i64| {
        x >= 0 && y >= 0 && x < i64::from(width) && y < i64::from(height) && labels[(y * i64::from(width) + x) as usize] == label
    };
    let mut outside = vec![false; (rw * rh) as usize];
    let mut queue = VecDeque::new();
    // (x0, y0) is never a wall
    outside[0] = true;
    queue.push_back((0i64, 0i64));
    while let Some((lx, ly)) = queue.pop_front() {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (lx + dx, ly + dy);
            if nx < 0 || ny < 0 || nx >= rw || ny >= rh {
                continue;
            }
            let k = (ny * rw + nx) as usize;
            if !outside[k] && !is_wall(x0 + nx, y0 + ny) {
                outside[k] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    let mut filled = BinaryMask::new(width, height);
    for ly in 1..rh - 1 {
        for lx in 1..rw - 1 {
            if !outside[(ly * rw + lx) as usize] {
                filled.set((x0 + lx) as u32, (y0 + ly) as u32, true);
            }
        }
    }
    filled
}

/// Every 8-connected component of `mask`, in raster order of first pixel.
pub fn filled_components(mask: &BinaryMask) -> Vec<FilledComponent> {
    let (labels, comps) = label_components(mask);
    let (w, h) = (mask.width(), mask.height());
    comps
        .into_iter()
        .enumerate()
        .map(|(i, pixels)| {
            let label = i as u32 + 1;
            let start = pixels[0];
            let contour = trace_outer_border(start, |p| {
                p.x >= 0 && p.y >= 0 && (p.x as u32) < w && (p.y as u32) < h && labels[(p.y as u32 * w + p.x as u32) as usize] == label
            });
            let bbox = bbox_of(&pixels);
            let filled = fill_holes(&labels, label, w, h, bbox);
            let mut own = BinaryMask::new(w, h);
            for p in &pixels {
                own.set(p.x as u32, p.y as u32, true);
            }
            FilledComponent {
                contour,
                filled_area: filled.count() as u64,
                pixel_count: pixels.len() as u64,
                pixels: own,
                filled,
                bbox,
            }
        })
        .collect()
}

/// One contour per 8-connected component, in raster order of the component's
/// first pixel. Components of one or two pixels have no closed boundary of
/// three or more points and are omitted.
pub fn extract_contours(mask: &BinaryMask) -> Vec<Contour> {
    filled_components(mask)
        .into_iter()
        .filter(|c| c.contour.len() >= 3)
        .map(|c| Contour { points: c.contour, area: c.filled_area })
        .collect()
}

/// Contours whose enclosed area reaches `min_area`.
pub fn significant_contours(mask: &BinaryMask, min_area: u64) -> Vec<Contour> {
    extract_contours(mask).into_iter().filter(|c| c.area >= min_area).collect()
}

/// Maximal enclosed area; ties go to the earliest raster-order start point.
pub fn largest_contour(contours: &[Contour]) -> Result<&Contour, ImagingError> {
    contours
        .iter()
        .min_by(|a, b| {
            b.area.cmp(&a.area).then_with(|| (a.start().y, a.start().x).cmp(&(b.start().y, b.start().x)))
        })
        .ok_or(ImagingError::EmptyContourSet)
}
