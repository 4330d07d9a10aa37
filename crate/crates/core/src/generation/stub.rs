//! Silhouette extrusion: a deterministic stand-in for a neural image-to-3D
//! generator. The largest mask component's outer pixel boundary is
//! simplified, triangulated and extruded into a closed prism.

use serde::{Deserialize, Serialize};

use super::GenerationError;
use crate::imaging::{filled_components, shoelace_area, BinaryMask};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DepthPolicy {
    /// Constant extrusion depth in meters.
    Fixed { meters: f64 },
    /// `depth = factor · √(silhouette area in m²)`. Not physical, only keeps
    /// proportions plausible.
    SqrtArea { factor: f64 },
}

impl Default for DepthPolicy {
    fn default() -> Self {
        DepthPolicy::SqrtArea { factor: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StubParams {
    pub depth: DepthPolicy,
    pub meters_per_px: f64,
    /// Douglas–Peucker tolerance on the pixel boundary.
    pub simplify_tolerance_px: f64,
}

impl Default for StubParams {
    fn default() -> Self {
        Self { depth: DepthPolicy::default(), meters_per_px: 0.001, simplify_tolerance_px: 1.5 }
    }
}

type P = (f64, f64);

const E: u8 = 0;
const S: u8 = 1;
const W: u8 = 2;
const N: u8 = 3;
const STEP: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Loops of pixel-corner coordinates along the boundary of `region`, walked
/// with the region on the right-hand side (screen coordinates, y down).
/// Diagonal pinch points are split, so every loop is simple.
pub(crate) fn crack_loops(region: &BinaryMask) -> Vec<Vec<(i64, i64)>> {
    let (w, h) = (i64::from(region.width()), i64::from(region.height()));
    let cw = (w + 1) as usize;
    let inside = |x: i64, y: i64| region.get_signed(x, y);
    // outgoing edge directions per corner, as a bit set
    let mut out = vec![0u8; cw * (h + 1) as usize];
    let idx = |x: i64, y: i64| y as usize * cw + x as usize;
    for (px, py) in region.iter_set() {
        let (x, y) = (i64::from(px), i64::from(py));
        if !inside(x, y - 1) {
            out[idx(x, y)] |= 1 << E;
        }
        if !inside(x + 1, y) {
            out[idx(x + 1, y)] |= 1 << S;
        }
        if !inside(x, y + 1) {
            out[idx(x + 1, y + 1)] |= 1 << W;
        }
        if !inside(x - 1, y) {
            out[idx(x, y + 1)] |= 1 << N;
        }
    }

    let mut loops = Vec::new();
    for start in 0..out.len() {
        while out[start] != 0 {
            let (sx, sy) = ((start % cw) as i64, (start / cw) as i64);
            let mut dir = out[start].trailing_zeros() as u8;
            let mut pts = vec![(sx, sy)];
            let (mut x, mut y) = (sx, sy);
            loop {
                out[idx(x, y)] &= !(1 << dir);
                x += STEP[dir as usize].0;
                y += STEP[dir as usize].1;
                if (x, y) == (sx, sy) {
                    break;
                }
                pts.push((x, y));
                let avail = out[idx(x, y)];
                let right = (dir + 1) % 4;
                dir = if avail & (1 << right) != 0 {
                    right
                } else if avail & (1 << dir) != 0 {
                    dir
                } else {
                    (dir + 3) % 4
                };
                debug_assert!(avail & (1 << dir) != 0, "boundary edges form closed loops");
            }
            loops.push(pts);
        }
    }
    loops
}

fn perpendicular_distance(p: P, a: P, b: P) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    ((p.0 - a.0) * dy - (p.1 - a.1) * dx).abs() / len
}

fn douglas_peucker_open(pts: &[P], tol: f64, keep: &mut [bool]) {
    if pts.len() < 3 {
        return;
    }
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let (i, d) = pts[1..pts.len() - 1]
        .iter()
        .enumerate()
        .map(|(i, &p)| (i + 1, perpendicular_distance(p, a, b)))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if d > tol {
        keep[i] = true;
        douglas_peucker_open(&pts[..=i], tol, &mut keep[..=i]);
        douglas_peucker_open(&pts[i..], tol, &mut keep[i..]);
    }
}

/// Douglas–Peucker on a closed ring: split at the first point and the point
/// farthest from it, simplify both halves.
pub fn simplify_closed(pts: &[P], tol: f64) -> Vec<P> {
    let n = pts.len();
    if n <= 3 {
        return pts.to_vec();
    }
    let far = (1..n)
        .max_by(|&i, &j| {
            let di = (pts[i].0 - pts[0].0).hypot(pts[i].1 - pts[0].1);
            let dj = (pts[j].0 - pts[0].0).hypot(pts[j].1 - pts[0].1);
            di.total_cmp(&dj).then(j.cmp(&i))
        })
        .unwrap();
    let mut ring: Vec<P> = pts.to_vec();
    ring.push(pts[0]);
    let mut keep = vec![false; n + 1];
    keep[0] = true;
    keep[far] = true;
    keep[n] = true;
    douglas_peucker_open(&ring[..=far], tol, &mut keep[..=far]);
    douglas_peucker_open(&ring[far..], tol, &mut keep[far..]);
    ring.pop();
    keep.pop();
    let simplified: Vec<P> = ring.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
    // the start point itself may be redundant on a straight run
    drop_collinear(simplified)
}

fn drop_collinear(mut pts: Vec<P>) -> Vec<P> {
    loop {
        let n = pts.len();
        if n <= 3 {
            return pts;
        }
        let pos = (0..n).find(|&i| {
            let (a, b, c) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
            ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs() < 1e-12
        });
        match pos {
            Some(i) => {
                pts.remove(i);
            }
            None => return pts,
        }
    }
}

fn cross3(a: P, b: P, c: P) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn in_triangle(p: P, a: P, b: P, c: P) -> bool {
    cross3(a, b, p) >= 0.0 && cross3(b, c, p) >= 0.0 && cross3(c, a, p) >= 0.0
}

/// Ear clipping for a simple counter-clockwise polygon; `n - 2` triangles.
pub fn ear_clip(poly: &[P]) -> Option<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&k| {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            if cross3(a, b, c) <= 1e-12 {
                return false;
            }
            idx.iter().all(|&j| {
                j == ia || j == ib || j == ic || poly[j] == a || poly[j] == b || poly[j] == c || !in_triangle(poly[j], a, b, c)
            })
        })?;
        tris.push([idx[(ear + m - 1) % m], idx[ear], idx[(ear + 1) % m]]);
        idx.remove(ear);
    }
    if cross3(poly[idx[0]], poly[idx[1]], poly[idx[2]]) <= 1e-12 {
        return None;
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Some(tris)
}

/// Silhouette polygon (pixel-corner coordinates, y down) of the mask's
/// largest component, holes filled.
pub fn silhouette(mask: &BinaryMask, tolerance_px: f64) -> Result<Vec<P>, GenerationError> {
    let comps = filled_components(mask);
    let largest = comps
        .iter()
        .max_by(|a, b| a.filled_area.cmp(&b.filled_area).then(b.bbox.raster_key().cmp(&a.bbox.raster_key())))
        .ok_or(GenerationError::EmptyMask)?;
    let outline = crack_loops(&largest.filled)
        .into_iter()
        .map(|l| l.into_iter().map(|(x, y)| (x as f64, y as f64)).collect::<Vec<P>>())
        .max_by(|a, b| shoelace_area(a).abs().total_cmp(&shoelace_area(b).abs()))
        .ok_or(GenerationError::EmptyMask)?;
    let simplified = simplify_closed(&outline, tolerance_px);
    if simplified.len() < 3 || shoelace_area(&simplified).abs() < 1e-9 {
        return Err(GenerationError::DegenerateSilhouette("silhouette collapses under simplification".into()));
    }
    Ok(simplified)
}

/// Pixel-corner ring (y down) to a counter-clockwise ring in a y-up frame.
fn flip_ccw(outline: &[P]) -> Vec<P> {
    let mut ring: Vec<P> = outline.iter().map(|&(x, y)| (x, -y)).collect();
    if shoelace_area(&ring) < 0.0 {
        ring.reverse();
    }
    ring
}

/// Extrudes the mask silhouette into a closed prism centred on the origin,
/// x right, y up, z toward the viewer.
pub fn stub_extrude(mask: &BinaryMask, params: &StubParams) -> Result<Mesh, GenerationError> {
    if mask.is_empty() {
        return Err(GenerationError::EmptyMask);
    }
    let mut ring = flip_ccw(&silhouette(mask, params.simplify_tolerance_px)?);
    let tris = match ear_clip(&ring) {
        Some(t) => t,
        None => {
            // simplification can pinch thin parts; the raw boundary is simple
            ring = flip_ccw(&silhouette(mask, 0.0)?);
            ear_clip(&ring).ok_or_else(|| GenerationError::DegenerateSilhouette("triangulation failed".into()))?
        }
    };

    let (x0, y0, x1, y1) = ring.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
    );
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let scale = params.meters_per_px;
    let outline: Vec<P> = ring.iter().map(|&(x, y)| ((x - cx) * scale, (y - cy) * scale)).collect();

    let n = outline.len();
    let area_m2 = shoelace_area(&outline).abs();
    let depth = match params.depth {
        DepthPolicy::Fixed { meters } => meters,
        DepthPolicy::SqrtArea { factor } => factor * area_m2.sqrt(),
    };
    if !(depth.is_finite() && depth > 0.0) {
        return Err(GenerationError::DegenerateSilhouette(format!("extrusion depth {depth} is not positive")));
    }
    let half = depth / 2.0;
    let mut vertices = Vec::with_capacity(2 * n);
    vertices.extend(outline.iter().map(|&(x, y)| [x, y, half]));
    vertices.extend(outline.iter().map(|&(x, y)| [x, y, -half]));
    let n32 = n as u32;
    let mut faces = Vec::with_capacity(2 * (n - 2) + 2 * n);
    for t in &tris {
        faces.push([t[0] as u32, t[1] as u32, t[2] as u32]);
    }
    for t in &tris {
        faces.push([n32 + t[0] as u32, n32 + t[2] as u32, n32 + t[1] as u32]);
    }
    for i in 0..n32 {
        let j = (i + 1) % n32;
        faces.push([n32 + i, n32 + j, j]);
        faces.push([n32 + i, j, i]);
    }
    Mesh::new(vertices, faces).map_err(|e| GenerationError::DegenerateSilhouette(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_mesh;

    fn rect_mask(w: u32, h: u32, x0: u32, y0: u32, rw: u32, rh: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh)
    }

    #[test]
    fn square_becomes_cuboid() {
        let m = rect_mask(40, 40, 5, 7, 20, 20);
        let params = StubParams { depth: DepthPolicy::Fixed { meters: 0.01 }, ..Default::default() };
        let mesh = stub_extrude(&m, &params).unwrap();
        assert_eq!((mesh.vertex_count(), mesh.face_count()), (8, 12));
        let r = validate_mesh(&mesh);
        assert!(r.is_watertight());
        assert_eq!(r.degenerate_faces, 0);
        // analytic prism: 0.020 m x 0.020 m x 0.010 m
        assert!((r.volume - 0.02 * 0.02 * 0.01).abs() < 1e-9);
        let (lo, hi) = r.bounding_box.unwrap();
        assert!((hi[0] - lo[0] - 0.02).abs() < 1e-12 && (hi[2] - lo[2] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn l_shape_counts() {
        // 6-corner silhouette: 20x20 square minus its top-right 10x10 quarter
        let m = BinaryMask::from_fn(30, 30, |x, y| {
            (2..22).contains(&x) && (2..22).contains(&y) && !((12..22).contains(&x) && (2..12).contains(&y))
        });
        let mesh = stub_extrude(&m, &StubParams::default()).unwrap();
        // caps: 2 x (6 - 2) triangles; sides: 6 x 2
        assert_eq!((mesh.vertex_count(), mesh.face_count()), (12, 20));
        let r = validate_mesh(&mesh);
        assert!(r.is_watertight());
        let depth = 0.4 * (300e-6f64).sqrt();
        assert!((r.volume - 300e-6 * depth).abs() < 1e-12);
    }

    #[test]
    fn empty_mask() {
        assert_eq!(stub_extrude(&BinaryMask::new(5, 5), &StubParams::default()), Err(GenerationError::EmptyMask));
    }

    #[test]
    fn diagonal_pinch_splits_into_simple_loops() {
        let mut m = BinaryMask::new(4, 4);
        m.set(0, 0, true);
        m.set(1, 1, true);
        let loops = crack_loops(&m);
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|l| l.len() == 4));
    }

    #[test]
    fn largest_component_is_used() {
        let m = BinaryMask::from_fn(40, 40, |x, y| {
            ((1..4).contains(&x) && (1..4).contains(&y)) || ((10..30).contains(&x) && (10..20).contains(&y))
        });
        let mesh = stub_extrude(&m, &StubParams { depth: DepthPolicy::Fixed { meters: 1.0 }, ..Default::default() }).unwrap();
        assert_eq!(mesh.vertex_count(), 8);
        assert!((validate_mesh(&mesh).volume - 0.02 * 0.01).abs() < 1e-12);
    }

    #[test]
    fn disc_volume_within_tolerance_band() {
        let m = BinaryMask::from_fn(120, 120, |x, y| {
            let (dx, dy) = (f64::from(x) - 60.0, f64::from(y) - 60.0);
            dx * dx + dy * dy <= 45.0 * 45.0
        });
        let params = StubParams { depth: DepthPolicy::Fixed { meters: 0.02 }, ..Default::default() };
        let mesh = stub_extrude(&m, &params).unwrap();
        let r = validate_mesh(&mesh);
        assert!(r.is_watertight());
        assert_eq!(r.degenerate_faces, 0);
        let expected = m.count() as f64 * 1e-6 * 0.02;
        assert!((r.volume - expected).abs() / expected < 0.05, "{} vs {}", r.volume, expected);
    }

    #[test]
    fn deterministic() {
        let m = BinaryMask::from_fn(50, 50, |x, y| (x * 7 + y * 3) % 11 < 6 && (5..45).contains(&x) && (5..45).contains(&y));
        let a = stub_extrude(&m, &StubParams::default()).unwrap();
        let b = stub_extrude(&m, &StubParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ear_clip_counts() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert_eq!(ear_clip(&sq).unwrap().len(), 2);
        let concave = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (2.0, 1.0), (0.0, 4.0)];
        assert_eq!(ear_clip(&concave).unwrap().len(), 3);
        let cw: Vec<P> = sq.iter().rev().copied().collect();
        assert!(ear_clip(&cw).is_none());
    }

    #[test]
    fn simplify_keeps_square_corners() {
        let mut ring = Vec::new();
        for i in 0..10 {
            ring.push((f64::from(i), 0.0));
        }
        for i in 0..10 {
            ring.push((10.0, f64::from(i)));
        }
        for i in 0..10 {
            ring.push((10.0 - f64::from(i), 10.0));
        }
        for i in 0..10 {
            ring.push((0.0, 10.0 - f64::from(i)));
        }
        let s = simplify_closed(&ring, 1.5);
        assert_eq!(s.len(), 4);
        assert!((shoelace_area(&s).abs() - 100.0).abs() < 1e-12);
    }
}
