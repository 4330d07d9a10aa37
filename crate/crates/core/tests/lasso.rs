use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use zonecap_core::imaging::BinaryMask;
use zonecap_core::lasso::{close_stroke, mask_inside_fraction, point_in_polygon, LassoConfig, Point, Stroke};

fn star(rng: &mut StdRng, n: usize, c: Point) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let r = rng.gen_range(20.0..80.0);
            (c.0 + r * t.cos(), c.1 + r * t.sin())
        })
        .collect()
}

/// Winding number; a point on an edge counts as inside.
fn winding(poly: &[Point], p: Point) -> bool {
    let mut wn = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let within = p.0 >= a.0.min(b.0) - 1e-9 && p.0 <= a.0.max(b.0) + 1e-9 && p.1 >= a.1.min(b.1) - 1e-9 && p.1 <= a.1.max(b.1) + 1e-9;
        if within && cross.abs() / len <= 1e-9 {
            return true;
        }
        if a.1 <= p.1 {
            if b.1 > p.1 && cross > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && cross < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

#[test]
fn even_odd_agrees_with_winding() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let n = rng.gen_range(3..30);
        let poly = close_stroke(&Stroke::from_points(&star(&mut rng, n, (100.0, 100.0))).unwrap(), &LassoConfig::default());
        let Ok(poly) = poly else { continue };
        for _ in 0..1000 {
            // integer points hit vertices and edges now and then
            let p = if rng.gen_bool(0.3) {
                (rng.gen_range(0..200) as f64, rng.gen_range(0..200) as f64)
            } else {
                (rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0))
            };
            assert_eq!(point_in_polygon(&poly, p), winding(poly.vertices(), p), "{p:?}");
        }
        for &v in poly.vertices() {
            assert!(point_in_polygon(&poly, v));
        }
    }
}

proptest! {
    #[test]
    fn translation_invariant(seed: u64, n in 3usize..25, dx in -500.0f64..500.0, dy in -500.0f64..500.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let pts = star(&mut rng, n, (0.0, 0.0));
        let moved: Vec<Point> = pts.iter().map(|p| (p.0 + dx, p.1 + dy)).collect();
        let cfg = LassoConfig::default();
        let a = close_stroke(&Stroke::from_points(&pts).unwrap(), &cfg);
        let b = close_stroke(&Stroke::from_points(&moved).unwrap(), &cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a.area_px() - b.area_px()).abs() <= 1e-9 * a.area_px());
                prop_assert_eq!(a.vertices().len(), b.vertices().len());
                for (p, q) in a.vertices().iter().zip(b.vertices()) {
                    prop_assert!((p.0 + dx - q.0).abs() < 1e-6 && (p.1 + dy - q.1).abs() < 1e-6);
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn adding_an_inside_pixel_keeps_fraction_up(seed: u64, bits in prop::collection::vec(any::<bool>(), 64 * 64)) {
        let mut rng = StdRng::seed_from_u64(seed);
        let Ok(poly) = close_stroke(&Stroke::from_points(&star(&mut rng, 12, (32.0, 32.0))).unwrap(), &LassoConfig::default()) else {
            return Ok(());
        };
        let mut mask = BinaryMask::from_bits(64, 64, bits).unwrap();
        let Ok(old) = mask_inside_fraction(&poly, &mask) else { return Ok(()) };
        let total = mask.count();
        let inside_old = old * total as f64;
        let candidate = (0..64 * 64).map(|k| (k % 64, k / 64)).find(|&(x, y)| !mask.get(x, y) && point_in_polygon(&poly, (x as f64, y as f64)));
        if let Some((x, y)) = candidate {
            mask.set(x, y, true);
            let new = mask_inside_fraction(&poly, &mask).unwrap();
            prop_assert!(new >= inside_old / (total as f64 + 1.0) - 1e-12);
            prop_assert!(new >= old - 1e-12);
        }
    }
}
