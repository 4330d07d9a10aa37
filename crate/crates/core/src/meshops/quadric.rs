use std::ops::{Add, AddAssign, Mul};

use super::MeshopsError;
use crate::mesh::{cross, dot, norm, sub, Mesh, Vec3};

/// Symmetric 4×4 error quadric stored as its upper triangle:
/// `[aa, ab, ac, ad, bb, bc, bd, cc, cd, dd]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quadric {
    pub coef: [f64; 10],
}

/// Below this the 3×3 block is treated as singular.
pub(crate) const SINGULAR_DET: f64 = 1e-12;

impl Quadric {
    /// Squared distance to the plane `n·x + d = 0`; `n` should be unit length.
    pub fn from_plane(n: Vec3, d: f64) -> Self {
        let [a, b, c] = n;
        Self { coef: [a * a, a * b, a * c, a * d, b * b, b * c, b * d, c * c, c * d, d * d] }
    }

    /// Plane through `p` with normal `n` (normalized here). `None` when `n` is zero.
    pub fn through(p: Vec3, n: Vec3) -> Option<Self> {
        let len = norm(n);
        if len == 0.0 || !len.is_finite() {
            return None;
        }
        let n = [n[0] / len, n[1] / len, n[2] / len];
        Some(Self::from_plane(n, -dot(n, p)))
    }

    pub fn evaluate(&self, v: Vec3) -> f64 {
        let [aa, ab, ac, ad, bb, bc, bd, cc, cd, dd] = self.coef;
        let [x, y, z] = v;
        aa * x * x + 2.0 * ab * x * y + 2.0 * ac * x * z + 2.0 * ad * x + bb * y * y + 2.0 * bc * y * z
            + 2.0 * bd * y
            + cc * z * z
            + 2.0 * cd * z
            + dd
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let [aa, ab, ac, ad, bb, bc, bd, cc, cd, dd] = self.coef;
        [[aa, ab, ac, ad], [ab, bb, bc, bd], [ac, bc, cc, cd], [ad, bd, cd, dd]]
    }

    /// Point minimizing the quadric, or `None` if the 3×3 block is singular.
    pub fn minimizer(&self) -> Option<Vec3> {
        let [aa, ab, ac, ad, bb, bc, bd, cc, cd, _] = self.coef;
        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let a = [[aa, ab, ac], [ab, bb, bc], [ac, bc, cc]];
        let det = det3(a);
        if det.abs() < SINGULAR_DET {
            return None;
        }
        let rhs = [-ad, -bd, -cd];
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut m = a;
            for r in 0..3 {
                m[r][k] = rhs[r];
            }
            *o = det3(m) / det;
        }
        out.iter().all(|c| c.is_finite()).then_some(out)
    }
}

impl Add for Quadric {
    type Output = Quadric;
    fn add(mut self, rhs: Quadric) -> Quadric {
        self += rhs;
        self
    }
}

impl AddAssign for Quadric {
    fn add_assign(&mut self, rhs: Quadric) {
        for (a, b) in self.coef.iter_mut().zip(rhs.coef) {
            *a += b;
        }
    }
}

impl Mul<f64> for Quadric {
    type Output = Quadric;
    fn mul(mut self, k: f64) -> Quadric {
        for a in &mut self.coef {
            *a *= k;
        }
        self
    }
}

pub(crate) fn face_quadric(p: [Vec3; 3]) -> Option<Quadric> {
    Quadric::through(p[0], cross(sub(p[1], p[0]), sub(p[2], p[0])))
}

/// Per-vertex sum of the plane quadrics of incident faces. Zero-area faces
/// contribute nothing; a vertex whose faces are all zero-area is an error.
pub fn compute_quadrics(mesh: &Mesh) -> Result<Vec<Quadric>, MeshopsError> {
    let n = mesh.vertex_count();
    let mut quadrics = vec![Quadric::default(); n];
    let mut used = vec![false; n];
    let mut planar = vec![false; n];
    for (f, face) in mesh.faces().iter().enumerate() {
        let q = face_quadric(mesh.face_positions(f));
        for &v in face {
            used[v as usize] = true;
            if let Some(q) = q {
                quadrics[v as usize] += q;
                planar[v as usize] = true;
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| used[v] && !planar[v]) {
        return Err(MeshopsError::DegenerateFace(v));
    }
    Ok(quadrics)
}
