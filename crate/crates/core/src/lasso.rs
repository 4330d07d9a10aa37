//! Zone-selection geometry: closing a freehand stroke into a simple polygon
//! and deciding how much of a mask lies inside it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{point_on_segment, shoelace_area, BinaryMask};

pub type Point = (f64, f64);

const SAME_POINT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LassoError {
    #[error("stroke has {0} distinct points, need at least 3")]
    StrokeTooShort(usize),
    #[error("zone area {area:.1} px² is below the minimum of {min:.1} px²")]
    ZoneTooSmall { area: f64, min: f64 },
    #[error("stroke point ({0}, {1}) is not finite")]
    NonFinitePoint(f64, f64),
    #[error("mask has no set bits")]
    EmptyMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    /// Zones smaller than this (px²) are rejected as accidental.
    pub min_zone_area: f64,
    /// Consecutive points closer than this (px) are merged.
    pub merge_distance: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self { min_zone_area: 400.0, merge_distance: 0.5 }
    }
}

/// Ordered user stroke in image coordinates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    points: Vec<Point>,
    pub started_at_ms: u64,
    pub last_updated_at_ms: u64,
}

impl Stroke {
    pub fn new(now_ms: u64) -> Self {
        Self { points: Vec::new(), started_at_ms: now_ms, last_updated_at_ms: now_ms }
    }

    pub fn from_points(points: &[Point]) -> Result<Self, LassoError> {
        let mut s = Self::new(0);
        s.extend(points, 0)?;
        Ok(s)
    }

    /// Appends points in order. Rejects the whole batch if any coordinate
    /// is NaN or infinite.
    pub fn extend(&mut self, points: &[Point], now_ms: u64) -> Result<(), LassoError> {
        if let Some(&(x, y)) = points.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(LassoError::NonFinitePoint(x, y));
        }
        if self.points.is_empty() {
            self.started_at_ms = now_ms;
        }
        self.points.extend_from_slice(points);
        self.last_updated_at_ms = self.last_updated_at_ms.max(now_ms);
        Ok(())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Closed simple polygon. Stored open: the last vertex connects to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPolygon {
    vertices: Vec<Point>,
    area_px: f64,
}

impl LassoPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area_px(&self) -> f64 {
        self.area_px
    }

    /// `(min_x, min_y, max_x, max_y)` of the vertices.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(self, p)
    }
}

fn merge_close(points: &[Point], merge_distance: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        match out.last() {
            Some(&q) if dist(p, q) < merge_distance.max(SAME_POINT_EPS) => {}
            _ => out.push(p),
        }
    }
    while out.len() > 1 && dist(out[0], *out.last().unwrap()) < merge_distance.max(SAME_POINT_EPS) {
        out.pop();
    }
    out
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn cross(a: Point, b: Point) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Intersection of segments `a→b` and `c→d`; parallel segments never
/// intersect here (collinear overlap carries no area).
fn segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = (b.0 - a.0, b.1 - a.1);
    let s = (d.0 - c.0, d.1 - c.1);
    let denom = cross(r, s);
    if denom.abs() < 1e-12 {
        return None;
    }
    let ac = (c.0 - a.0, c.1 - a.1);
    let t = cross(ac, s) / denom;
    let u = cross(ac, r) / denom;
    let eps = 1e-12;
    if (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
        Some((a.0 + t * r.0, a.1 + t * r.1))
    } else {
        None
    }
}

fn first_crossing(pts: &[Point]) -> Option<(usize, usize, Point)> {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if let Some(x) = segment_intersection(a, b, pts[j], pts[(j + 1) % n]) {
                return Some((i, j, x));
            }
        }
    }
    None
}

/// Splits a closed path at self-intersections until every piece is simple.
fn simple_loops(pts: Vec<Point>, out: &mut Vec<Vec<Point>>) {
    let pts = merge_close(&pts, SAME_POINT_EPS);
    if pts.len() < 3 {
        return;
    }
    match first_crossing(&pts) {
        None => out.push(pts),
        Some((i, j, x)) => {
            let n = pts.len();
            let mut first = vec![x];
            first.extend_from_slice(&pts[i + 1..=j]);
            let mut second = vec![x];
            second.extend_from_slice(&pts[j + 1..]);
            second.extend_from_slice(&pts[..=i]);
            debug_assert!(first.len() < n + 1 && second.len() < n + 1);
            simple_loops(first, out);
            simple_loops(second, out);
        }
    }
}

/// Closes the stroke into a polygon. A self-crossing stroke yields its
/// largest simple loop.
pub fn close_stroke(stroke: &Stroke, cfg: &LassoConfig) -> Result<LassoPolygon, LassoError> {
    let pts = merge_close(stroke.points(), cfg.merge_distance);
    if pts.len() < 3 {
        return Err(LassoError::StrokeTooShort(pts.len()));
    }
    let mut loops = Vec::new();
    simple_loops(pts, &mut loops);
    let best = loops
        .into_iter()
        .map(|l| {
            let a = shoelace_area(&l).abs();
            (l, a)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let (vertices, area_px) = best.unwrap_or_default();
    if vertices.len() < 3 || area_px < cfg.min_zone_area || area_px <= 1e-12 {
        return Err(LassoError::ZoneTooSmall { area: area_px, min: cfg.min_zone_area });
    }
    Ok(LassoPolygon { vertices, area_px })
}

/// Even-odd rule; points on an edge count as inside.
pub fn point_in_polygon(poly: &LassoPolygon, p: Point) -> bool {
    let v = &poly.vertices;
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if point_on_segment(p, a, b) {
            return true;
        }
        if (a.1 > p.1) != (b.1 > p.1) {
            let x_cross = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Share of set bits whose pixel center lies inside the polygon.
pub fn mask_inside_fraction(poly: &LassoPolygon, mask: &BinaryMask) -> Result<f64, LassoError> {
    let (x0, y0, x1, y1) = poly.bounds();
    let mut total = 0usize;
    let mut inside = 0usize;
    for (x, y) in mask.iter_set() {
        total += 1;
        let p = (f64::from(x), f64::from(y));
        if p.0 >= x0 && p.0 <= x1 && p.1 >= y0 && p.1 <= y1 && point_in_polygon(poly, p) {
            inside += 1;
        }
    }
    if total == 0 {
        return Err(LassoError::EmptyMask);
    }
    Ok(inside as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loose() -> LassoConfig {
        LassoConfig { min_zone_area: 0.0, ..Default::default() }
    }

    #[test]
    fn square_stroke() {
        let s = Stroke::from_points(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]).unwrap();
        let p = close_stroke(&s, &loose()).unwrap();
        assert_eq!(p.area_px(), 100.0);
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn too_short() {
        let s = Stroke::from_points(&[(0.0, 0.0), (10.0, 0.0)]).unwrap();
        assert_eq!(close_stroke(&s, &loose()), Err(LassoError::StrokeTooShort(2)));
        let dup = Stroke::from_points(&[(0.0, 0.0), (0.0, 0.0), (5.0, 5.0), (5.2, 5.1)]).unwrap();
        assert_eq!(close_stroke(&dup, &loose()), Err(LassoError::StrokeTooShort(2)));
    }

    #[test]
    fn too_small() {
        let s = Stroke::from_points(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]).unwrap();
        assert!(matches!(close_stroke(&s, &LassoConfig::default()), Err(LassoError::ZoneTooSmall { .. })));
        let line = Stroke::from_points(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]).unwrap();
        assert!(matches!(close_stroke(&line, &loose()), Err(LassoError::ZoneTooSmall { .. })));
    }

    #[test]
    fn rejects_nan() {
        let mut s = Stroke::new(0);
        assert!(s.extend(&[(1.0, f64::NAN)], 5).is_err());
        assert!(s.is_empty());
    }

    #[test]
    fn figure_eight_keeps_larger_lobe() {
        let eight = [(0.0, 0.0), (20.0, 20.0), (20.0, 0.0), (0.0, 20.0), (-40.0, 40.0), (-40.0, -20.0)];
        let s = Stroke::from_points(&eight).unwrap();
        let p = close_stroke(&s, &loose()).unwrap();
        // oracle: segments (0,0)-(20,20) and (20,0)-(0,20) cross at (10,10),
        // leaving these two simple loops
        let right = [(10.0, 10.0), (20.0, 20.0), (20.0, 0.0)];
        let left = [(10.0, 10.0), (0.0, 20.0), (-40.0, 40.0), (-40.0, -20.0), (0.0, 0.0)];
        let (ra, la) = (shoelace_area(&right).abs(), shoelace_area(&left).abs());
        assert_eq!(ra, 100.0);
        assert!(la > ra);
        assert!((p.area_px() - la).abs() < 1e-9);
        let mut got = p.vertices().to_vec();
        let mut want = left.to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!(dist(*g, *w) < 1e-9);
        }
    }

    #[test]
    fn pip_basics() {
        let s = Stroke::from_points(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let p = close_stroke(&s, &loose()).unwrap();
        assert!(point_in_polygon(&p, (0.5, 0.5)));
        assert!(!point_in_polygon(&p, (-1.0, -1.0)));
        assert!(point_in_polygon(&p, (1.0, 0.5)));
        assert!(point_in_polygon(&p, (0.0, 0.0)));
    }

    #[test]
    fn fractions() {
        let s = Stroke::from_points(&[(0.0, 0.0), (20.0, 0.0), (20.0, 20.0), (0.0, 20.0)]).unwrap();
        let p = close_stroke(&s, &loose()).unwrap();
        let inside = BinaryMask::from_fn(40, 40, |x, y| (5..10).contains(&x) && (5..10).contains(&y));
        assert_eq!(mask_inside_fraction(&p, &inside).unwrap(), 1.0);
        let outside = BinaryMask::from_fn(40, 40, |x, y| (25..30).contains(&x) && (25..30).contains(&y));
        assert_eq!(mask_inside_fraction(&p, &outside).unwrap(), 0.0);
        assert_eq!(mask_inside_fraction(&p, &BinaryMask::new(4, 4)), Err(LassoError::EmptyMask));
    }

    #[test]
    fn straddling_mask_is_about_half() {
        // polygon edge at x = 19.5; mask spans columns 15..25
        let s = Stroke::from_points(&[(0.0, 0.0), (19.5, 0.0), (19.5, 30.0), (0.0, 30.0)]).unwrap();
        let p = close_stroke(&s, &loose()).unwrap();
        let m = BinaryMask::from_fn(40, 40, |x, y| (15..25).contains(&x) && (10..20).contains(&y));
        let bits = m.count() as f64;
        // brute force: per-pixel center test, boundary inclusive
        let expected = m.iter_set().filter(|&(x, _)| f64::from(x) <= 19.5).count() as f64 / bits;
        let got = mask_inside_fraction(&p, &m).unwrap();
        assert_eq!(got, expected);
        assert!((got - 0.5).abs() <= 2.0 / bits);
    }
}
