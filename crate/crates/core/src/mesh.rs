//! Indexed triangle mesh and structural validation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = [f64; 3];

/// Faces with area below this (m²) count as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("face {face} references vertex {index}, mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: u32, count: usize },
    #[error("face {0} repeats a vertex index")]
    RepeatedIndex(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("normals given for {normals} vertices, mesh has {vertices}")]
    NormalCount { normals: usize, vertices: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normals: Option<Vec<Vec3>>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let m = Self { vertices, faces, normals: None };
        m.check()?;
        Ok(m)
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self, MeshError> {
        if normals.len() != self.vertices.len() {
            return Err(MeshError::NormalCount { normals: normals.len(), vertices: self.vertices.len() });
        }
        self.normals = Some(normals);
        Ok(self)
    }

    fn check(&self) -> Result<(), MeshError> {
        if let Some(i) = self.vertices.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(MeshError::NonFinite(i));
        }
        let count = self.vertices.len();
        for (face, f) in self.faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i as usize >= count) {
                return Err(MeshError::IndexOutOfRange { face, index, count });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::RepeatedIndex(face));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_positions(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    /// `(min, max)` corners; `None` for a mesh without vertices.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (
                [lo[0].min(v[0]), lo[1].min(v[1]), lo[2].min(v[2])],
                [hi[0].max(v[0]), hi[1].max(v[1]), hi[2].max(v[2])],
            )
        }))
    }

    /// Signed enclosed volume via the divergence theorem; positive for a
    /// closed mesh with outward-facing (counter-clockwise) triangles.
    pub fn signed_volume(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.face_positions(f);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn triangle_area(p: [Vec3; 3]) -> f64 {
    0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Every undirected edge is shared by at most two faces.
    pub is_manifold_edge: bool,
    /// Edges used by exactly one face.
    pub boundary_edges: usize,
    /// Edges used by more than two faces.
    pub non_manifold_edges: usize,
    pub degenerate_faces: usize,
    pub bounding_box: Option<(Vec3, Vec3)>,
    pub volume: f64,
}

impl ValidationReport {
    /// Edge-manifold with no boundary.
    pub fn is_watertight(&self) -> bool {
        self.is_manifold_edge && self.boundary_edges == 0
    }
}

pub fn edge_face_counts(mesh: &Mesh) -> HashMap<(u32, u32), u32> {
    let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    counts
}

pub fn validate_mesh(mesh: &Mesh) -> ValidationReport {
    let counts = edge_face_counts(mesh);
    let non_manifold_edges = counts.values().filter(|&&c| c > 2).count();
    let boundary_edges = counts.values().filter(|&&c| c == 1).count();
    let degenerate_faces =
        (0..mesh.face_count()).filter(|&f| triangle_area(mesh.face_positions(f)) < DEGENERATE_AREA).count();
    ValidationReport {
        is_manifold_edge: non_manifold_edges == 0,
        boundary_edges,
        non_manifold_edges,
        degenerate_faces,
        bounding_box: mesh.bounding_box(),
        volume: mesh.signed_volume(),
    }
}

/// Axis-aligned box from `min` to `max`, outward-facing triangles.
pub fn cuboid(min: Vec3, max: Vec3) -> Mesh {
    let v = |i: usize| [if i & 1 == 0 { min[0] } else { max[0] }, if i & 2 == 0 { min[1] } else { max[1] }, if i & 4 == 0 { min[2] } else { max[2] }];
    let vertices = (0..8).map(v).collect();
    let faces = vec![
        [0, 2, 1], [1, 2, 3], // z = min
        [4, 5, 6], [5, 7, 6], // z = max
        [0, 1, 4], [1, 5, 4], // y = min
        [2, 6, 3], [3, 6, 7], // y = max
        [0, 4, 2], [2, 4, 6], // x = min
        [1, 3, 5], [3, 7, 5], // x = max
    ];
    Mesh::new(vertices, faces).expect("valid cuboid")
}

/// Unit-radius sphere from a subdivided icosahedron: 12, 42, 162, 642...
/// vertices for levels 0, 1, 2, 3.
pub fn icosphere(level: u32) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(unit)
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a as usize], vertices[b as usize]);
                vertices.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vertices.len() as u32 - 1
            })
        };
        faces = faces
            .iter()
            .flat_map(|&[a, b, c]| {
                let (ab, bc, ca) = (mid(a, b, &mut vertices), mid(b, c, &mut vertices), mid(c, a, &mut vertices));
                [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
            })
            .collect();
    }
    Mesh::new(vertices, faces).expect("valid icosphere")
}

fn unit(v: Vec3) -> Vec3 {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Flat `n`×`n` vertex grid over the unit square at z = 0, facing +z.
pub fn grid(n: usize) -> Mesh {
    assert!(n >= 2, "grid needs at least 2 vertices per side");
    let step = 1.0 / (n - 1) as f64;
    let vertices = (0..n * n).map(|k| [(k % n) as f64 * step, (k / n) as f64 * step, 0.0]).collect();
    let id = |i: usize, j: usize| (j * n + i) as u32;
    let faces = (0..(n - 1) * (n - 1))
        .flat_map(|k| {
            let (i, j) = (k % (n - 1), k / (n - 1));
            [[id(i, j), id(i + 1, j), id(i + 1, j + 1)], [id(i, j), id(i + 1, j + 1), id(i, j + 1)]]
        })
        .collect();
    Mesh::new(vertices, faces).expect("valid grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_structure() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 1, 3]]), Err(MeshError::IndexOutOfRange { .. })));
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 1, 1]]), Err(MeshError::RepeatedIndex(0))));
        let mut bad = v;
        bad[2][1] = f64::NAN;
        assert!(matches!(Mesh::new(bad, vec![[0, 1, 2]]), Err(MeshError::NonFinite(2))));
    }

    #[test]
    fn unit_cube_report() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        let r = validate_mesh(&cube);
        assert!(r.is_manifold_edge && r.is_watertight());
        assert_eq!(r.degenerate_faces, 0);
        assert!((r.volume - 1.0).abs() < 1e-12);
        assert_eq!(r.bounding_box, Some(([0.0; 3], [1.0; 3])));
    }

    #[test]
    fn open_cube_reports_boundary() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        let faces: Vec<[u32; 3]> = cube.faces()[2..].to_vec();
        let open = Mesh::new(cube.vertices().to_vec(), faces).unwrap();
        let r = validate_mesh(&open);
        assert!(r.is_manifold_edge);
        assert_eq!(r.boundary_edges, 4);
        assert!(!r.is_watertight());
        assert!(r.volume.is_finite());
    }

    #[test]
    fn non_manifold_fin() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        let m = Mesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap();
        let r = validate_mesh(&m);
        assert!(!r.is_manifold_edge);
        assert_eq!(r.non_manifold_edges, 1);
    }

    #[test]
    fn icosphere_counts_and_closure() {
        for (level, verts) in [(0, 12), (1, 42), (2, 162)] {
            let s = icosphere(level);
            assert_eq!(s.vertex_count(), verts);
            assert_eq!(s.face_count(), 20 * 4usize.pow(level));
            let r = validate_mesh(&s);
            assert!(r.is_watertight());
            assert!(r.volume > 0.0 && r.volume < 4.0 / 3.0 * std::f64::consts::PI);
        }
    }

    #[test]
    fn grid_is_open_and_flat() {
        let g = grid(11);
        assert_eq!((g.vertex_count(), g.face_count()), (121, 200));
        assert_eq!(validate_mesh(&g).boundary_edges, 40);
    }

    #[test]
    fn degenerate_count() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let m = Mesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(validate_mesh(&m).degenerate_faces, 1);
    }
}
