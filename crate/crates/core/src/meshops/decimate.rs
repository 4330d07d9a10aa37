//! Quadric-error edge-collapse decimation.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::quadric::{compute_quadrics, Quadric};
use super::MeshopsError;
use crate::mesh::{cross, dot, edge_face_counts, norm, sub, Mesh, Vec3, DEGENERATE_AREA};

/// Weight of the perpendicular planes that pin open boundaries in place.
const BOUNDARY_WEIGHT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecimationParams {
    pub target_vertices: usize,
    /// Stop once the cheapest collapse costs more than this (m²).
    pub max_error: Option<f64>,
    /// Boundary vertices are neither removed nor moved.
    pub preserve_boundary: bool,
}

impl Default for DecimationParams {
    fn default() -> Self {
        Self { target_vertices: 2048, max_error: None, preserve_boundary: false }
    }
}

impl DecimationParams {
    pub fn with_target(target_vertices: usize) -> Self {
        Self { target_vertices, ..Self::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DecimationReport {
    pub input_vertices: usize,
    pub output_vertices: usize,
    /// Cost of each executed collapse, in execution order.
    pub collapse_costs: Vec<f64>,
}

pub fn decimate(mesh: &Mesh, params: &DecimationParams) -> Result<Mesh, MeshopsError> {
    decimate_with_report(mesh, params).map(|(m, _)| m)
}

pub fn decimate_with_report(mesh: &Mesh, params: &DecimationParams) -> Result<(Mesh, DecimationReport), MeshopsError> {
    if params.target_vertices < 4 {
        return Err(MeshopsError::TargetTooSmall(params.target_vertices));
    }
    if let Some((&(a, b), _)) = edge_face_counts(mesh).iter().find(|(_, &c)| c > 2) {
        return Err(MeshopsError::NotManifold(a, b));
    }
    let input_vertices = mesh.vertex_count();
    if input_vertices <= params.target_vertices {
        let report = DecimationReport { input_vertices, output_vertices: input_vertices, collapse_costs: vec![] };
        return Ok((mesh.clone(), report));
    }

    let mut state = State::new(mesh, params)?;
    state.run(params);
    let out = state.compact()?;
    let report =
        DecimationReport { input_vertices, output_vertices: out.vertex_count(), collapse_costs: state.costs };
    Ok((out, report))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    a: u32,
    b: u32,
    stamp: (u32, u32),
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Reversed so the max-heap pops the cheapest edge; ties by index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

struct State {
    pos: Vec<Vec3>,
    quadric: Vec<Quadric>,
    alive: Vec<bool>,
    version: Vec<u32>,
    faces: Vec<[u32; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    live_vertices: usize,
    heap: BinaryHeap<Candidate>,
    preserve_boundary: bool,
    costs: Vec<f64>,
}

impl State {
    fn new(mesh: &Mesh, params: &DecimationParams) -> Result<Self, MeshopsError> {
        let n = mesh.vertex_count();
        let mut quadric = compute_quadrics(mesh)?;
        let mut vertex_faces = vec![Vec::new(); n];
        for (f, face) in mesh.faces().iter().enumerate() {
            for &v in face {
                vertex_faces[v as usize].push(f);
            }
        }
        // Constrain open edges with planes perpendicular to their face.
        let counts = edge_face_counts(mesh);
        for (f, face) in mesh.faces().iter().enumerate() {
            let p = mesh.face_positions(f);
            let normal = cross(sub(p[1], p[0]), sub(p[2], p[0]));
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                if counts[&(a.min(b), a.max(b))] != 1 {
                    continue;
                }
                let edge = sub(p[(k + 1) % 3], p[k]);
                if let Some(q) = Quadric::through(p[k], cross(edge, normal)) {
                    let q = q * BOUNDARY_WEIGHT;
                    quadric[a as usize] += q;
                    quadric[b as usize] += q;
                }
            }
        }
        let used: Vec<bool> = (0..n).map(|v| !vertex_faces[v].is_empty()).collect();
        let mut s = Self {
            pos: mesh.vertices().to_vec(),
            quadric,
            live_vertices: used.iter().filter(|&&u| u).count(),
            alive: used,
            version: vec![0; n],
            faces: mesh.faces().to_vec(),
            face_alive: vec![true; mesh.face_count()],
            vertex_faces,
            heap: BinaryHeap::new(),
            preserve_boundary: params.preserve_boundary,
            costs: Vec::new(),
        };
        for (a, b) in counts.keys() {
            s.push_edge(*a, *b);
        }
        Ok(s)
    }

    fn run(&mut self, params: &DecimationParams) {
        while self.live_vertices > params.target_vertices {
            let Some(c) = self.heap.pop() else { break };
            if !self.alive[c.a as usize]
                || !self.alive[c.b as usize]
                || (self.version[c.a as usize], self.version[c.b as usize]) != c.stamp
            {
                continue;
            }
            if params.max_error.is_some_and(|m| c.cost > m) {
                break;
            }
            let Some((keep, gone)) = self.orient(c.a, c.b) else { continue };
            if !self.link_ok(keep, gone) {
                continue;
            }
            let options = self.placements(keep, gone);
            let Some(&(cost, target)) = options.iter().find(|(_, t)| self.placement_ok(keep, gone, *t)) else {
                continue;
            };
            if cost > c.cost + 1e-15 {
                // Cheaper spot was illegal; requeue at the real price.
                self.heap.push(Candidate { cost, ..c });
                continue;
            }
            self.collapse(keep, gone, target);
            self.costs.push(cost);
        }
    }

    fn push_edge(&mut self, a: u32, b: u32) {
        let (a, b) = (a.min(b), a.max(b));
        let Some(keep_gone) = self.orient(a, b) else { return };
        let options = self.placements(keep_gone.0, keep_gone.1);
        let cost = options[0].0;
        self.heap.push(Candidate { cost, a, b, stamp: (self.version[a as usize], self.version[b as usize]) });
    }

    /// `(kept, removed)`; `None` when boundary preservation forbids the edge.
    fn orient(&self, a: u32, b: u32) -> Option<(u32, u32)> {
        if !self.preserve_boundary {
            return Some((a, b));
        }
        match (self.is_boundary(a), self.is_boundary(b)) {
            (true, true) => None,
            (false, true) => Some((b, a)),
            _ => Some((a, b)),
        }
    }

    /// Candidate positions sorted by cost: the quadric minimizer when the
    /// system is non-singular, then both endpoints and the midpoint.
    fn placements(&self, keep: u32, gone: u32) -> Vec<(f64, Vec3)> {
        let q = self.quadric[keep as usize] + self.quadric[gone as usize];
        let (pk, pg) = (self.pos[keep as usize], self.pos[gone as usize]);
        let mut spots = if self.preserve_boundary && self.is_boundary(keep) {
            vec![pk]
        } else {
            let mid = [(pk[0] + pg[0]) / 2.0, (pk[1] + pg[1]) / 2.0, (pk[2] + pg[2]) / 2.0];
            let mut s: Vec<Vec3> = q.minimizer().into_iter().collect();
            s.extend([pk, pg, mid]);
            s
        };
        let mut out: Vec<(f64, Vec3)> = spots.drain(..).map(|p| (q.evaluate(p).max(0.0), p)).collect();
        // Stable: on ties the minimizer, then `keep`, wins.
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    fn face_has(&self, f: usize, v: u32) -> bool {
        self.faces[f].contains(&v)
    }

    fn neighbors(&self, v: u32) -> BTreeSet<u32> {
        self.vertex_faces[v as usize].iter().flat_map(|&f| self.faces[f]).filter(|&u| u != v).collect()
    }

    fn shared_faces(&self, a: u32, b: u32) -> Vec<usize> {
        self.vertex_faces[a as usize].iter().copied().filter(|&f| self.face_has(f, b)).collect()
    }

    fn is_boundary(&self, v: u32) -> bool {
        self.neighbors(v).into_iter().any(|u| self.shared_faces(v, u).len() == 1)
    }

    /// Topology check: the two one-rings may only share the vertices
    /// opposite the edge, and an interior edge may not join two boundaries.
    fn link_ok(&self, a: u32, b: u32) -> bool {
        let shared = self.shared_faces(a, b);
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        let opposite: BTreeSet<u32> =
            shared.iter().flat_map(|&f| self.faces[f]).filter(|&u| u != a && u != b).collect();
        let common: BTreeSet<u32> = self.neighbors(a).intersection(&self.neighbors(b)).copied().collect();
        if common != opposite {
            return false;
        }
        if shared.len() == 2 && self.is_boundary(a) && self.is_boundary(b) {
            return false;
        }
        // A closed tetrahedron would fold into a doubled triangle.
        !(shared.len() == 2 && self.vertex_faces[a as usize].len() == 3 && self.vertex_faces[b as usize].len() == 3)
    }

    /// Surviving faces keep their orientation and stay non-degenerate.
    fn placement_ok(&self, keep: u32, gone: u32, target: Vec3) -> bool {
        for v in [keep, gone] {
            for &f in &self.vertex_faces[v as usize] {
                if self.face_has(f, keep) && self.face_has(f, gone) {
                    continue;
                }
                let face = self.faces[f];
                let old = face.map(|u| self.pos[u as usize]);
                let new = face.map(|u| if u == keep || u == gone { target } else { self.pos[u as usize] });
                let n_old = cross(sub(old[1], old[0]), sub(old[2], old[0]));
                let n_new = cross(sub(new[1], new[0]), sub(new[2], new[0]));
                if 0.5 * norm(n_new) < DEGENERATE_AREA || dot(n_old, n_new) < 0.0 {
                    return false;
                }
            }
        }
        true
    }

    fn collapse(&mut self, keep: u32, gone: u32, target: Vec3) {
        let (k, g) = (keep as usize, gone as usize);
        self.pos[k] = target;
        let qg = self.quadric[g];
        self.quadric[k] += qg;
        for f in std::mem::take(&mut self.vertex_faces[g]) {
            if self.face_has(f, keep) {
                self.face_alive[f] = false;
                for u in self.faces[f] {
                    self.vertex_faces[u as usize].retain(|&x| x != f);
                }
            } else {
                for u in &mut self.faces[f] {
                    if *u == gone {
                        *u = keep;
                    }
                }
                self.vertex_faces[k].push(f);
            }
        }
        self.alive[g] = false;
        self.live_vertices -= 1;
        self.version[g] += 1;

        // Anything touching the new one-ring may have changed cost or legality.
        let ring = self.neighbors(keep);
        self.version[k] += 1;
        for &u in &ring {
            self.version[u as usize] += 1;
        }
        let mut edges = BTreeSet::new();
        for &u in ring.iter().chain(std::iter::once(&keep)) {
            for w in self.neighbors(u) {
                edges.insert((u.min(w), u.max(w)));
            }
        }
        for (a, b) in edges {
            self.push_edge(a, b);
        }
    }

    fn compact(&self) -> Result<Mesh, MeshopsError> {
        let mut remap = vec![u32::MAX; self.pos.len()];
        let mut vertices = Vec::new();
        for (v, &alive) in self.alive.iter().enumerate() {
            if alive && !self.vertex_faces[v].is_empty() {
                remap[v] = vertices.len() as u32;
                vertices.push(self.pos[v]);
            }
        }
        let faces = self
            .faces
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, &a)| a)
            .map(|(f, _)| f.map(|u| remap[u as usize]))
            .collect();
        Ok(Mesh::new(vertices, faces)?)
    }
}
