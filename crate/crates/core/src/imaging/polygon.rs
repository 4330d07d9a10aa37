use super::{BinaryMask, ImagingError};

const ON_EDGE_EPS: f64 = 1e-9;

/// Signed shoelace area; positive for counter-clockwise in a y-up frame.
pub fn shoelace_area(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (x1, y1) = points[i];
            let (x2, y2) = points[(i + 1) % n];
            x1 * y2 - x2 * y1
        })
        .sum();
    twice / 2.0
}

pub fn point_on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1) <= ON_EDGE_EPS;
    }
    let t = ((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2;
    if !(-ON_EDGE_EPS..=1.0 + ON_EDGE_EPS).contains(&t) {
        return false;
    }
    let cross = (p.0 - a.0) * dy - (p.1 - a.1) * dx;
    cross.abs() / len2.sqrt() <= ON_EDGE_EPS
}

/// Even-odd fill of a closed polygon sampled at integer pixel centers.
/// Pixels whose center lies on an edge are set.
pub fn rasterize_polygon(points: &[(f64, f64)], width: u32, height: u32) -> Result<BinaryMask, ImagingError> {
    if points.len() < 3 || shoelace_area(points).abs() < 1e-12 {
        return Err(ImagingError::DegeneratePolygon);
    }
    let mut mask = BinaryMask::new(width, height);
    let n = points.len();
    let edges: Vec<((f64, f64), (f64, f64))> = (0..n).map(|i| (points[i], points[(i + 1) % n])).collect();

    let mut crossings = Vec::new();
    for y in 0..height {
        let fy = f64::from(y);
        crossings.clear();
        for &((x1, y1), (x2, y2)) in &edges {
            // half-open in y so shared vertices count once
            if (y1 <= fy && fy < y2) || (y2 <= fy && fy < y1) {
                crossings.push(x1 + (fy - y1) * (x2 - x1) / (y2 - y1));
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        for pair in crossings.chunks_exact(2) {
            let lo = (pair[0] - ON_EDGE_EPS).ceil().max(0.0);
            let hi = (pair[1] + ON_EDGE_EPS).floor().min(f64::from(width) - 1.0);
            let mut x = lo;
            while x <= hi {
                mask.set(x as u32, y, true);
                x += 1.0;
            }
        }
    }

    // boundary pixels
    for &((x1, y1), (x2, y2)) in &edges {
        let y_lo = (y1.min(y2) - ON_EDGE_EPS).ceil().max(0.0);
        let y_hi = (y1.max(y2) + ON_EDGE_EPS).floor().min(f64::from(height) - 1.0);
        let mut fy = y_lo;
        while fy <= y_hi {
            if (y2 - y1).abs() < ON_EDGE_EPS {
                let x_lo = (x1.min(x2) - ON_EDGE_EPS).ceil().max(0.0);
                let x_hi = (x1.max(x2) + ON_EDGE_EPS).floor().min(f64::from(width) - 1.0);
                let mut fx = x_lo;
                while fx <= x_hi {
                    mask.set(fx as u32, fy as u32, true);
                    fx += 1.0;
                }
            } else {
                let x = x1 + (fy - y1) * (x2 - x1) / (y2 - y1);
                let rx = x.round();
                if (x - rx).abs() <= ON_EDGE_EPS && rx >= 0.0 && rx < f64::from(width) {
                    mask.set(rx as u32, fy as u32, true);
                }
            }
            fy += 1.0;
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Per-pixel even-odd test with inclusive boundary.
    fn brute_force(points: &[(f64, f64)], w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let p = (f64::from(x), f64::from(y));
            let n = points.len();
            let mut inside = false;
            for i in 0..n {
                let a = points[i];
                let b = points[(i + 1) % n];
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
        })
    }

    #[test]
    fn four_by_four_square() {
        let sq = [(2.0, 2.0), (5.0, 2.0), (5.0, 5.0), (2.0, 5.0)];
        let m = rasterize_polygon(&sq, 10, 10).unwrap();
        assert_eq!(m.count(), 16);
        assert_eq!(m, brute_force(&sq, 10, 10));
    }

    #[test]
    fn outside_and_full_canvas() {
        let tri = [(-10.0, -10.0), (-5.0, -10.0), (-5.0, -2.0)];
        assert_eq!(rasterize_polygon(&tri, 8, 8).unwrap().count(), 0);
        let full = [(0.0, 0.0), (7.0, 0.0), (7.0, 5.0), (0.0, 5.0)];
        assert_eq!(rasterize_polygon(&full, 8, 6).unwrap().count(), 48);
    }

    #[test]
    fn degenerate() {
        assert_eq!(rasterize_polygon(&[(0.0, 0.0), (1.0, 1.0)], 4, 4), Err(ImagingError::DegeneratePolygon));
        assert_eq!(
            rasterize_polygon(&[(0.0, 0.0), (1.0, 1.0), (3.0, 3.0)], 4, 4),
            Err(ImagingError::DegeneratePolygon)
        );
    }

    #[test]
    fn matches_brute_force_on_assorted_shapes() {
        let shapes: Vec<Vec<(f64, f64)>> = vec![
            vec![(1.0, 1.0), (14.0, 3.0), (6.0, 13.0)],
            vec![(0.5, 0.5), (12.3, 1.7), (13.9, 12.1), (7.0, 6.0), (1.2, 14.4)],
            vec![(3.0, 0.0), (6.0, 9.0), (0.0, 3.0), (9.0, 3.0), (0.0, 9.0)],
            vec![(2.0, 2.0), (12.0, 2.0), (12.0, 12.0), (7.0, 12.0), (7.0, 7.0), (2.0, 7.0)],
            vec![(-3.0, 4.0), (20.0, 4.0), (8.0, 18.0)],
        ];
        for s in &shapes {
            assert_eq!(rasterize_polygon(s, 16, 16).unwrap(), brute_force(s, 16, 16), "{s:?}");
        }
    }

    #[test]
    fn shoelace_orientation() {
        let ccw = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)];
        assert_eq!(shoelace_area(&ccw), 100.0);
        let cw: Vec<_> = ccw.iter().rev().copied().collect();
        assert_eq!(shoelace_area(&cw), -100.0);
    }
}
