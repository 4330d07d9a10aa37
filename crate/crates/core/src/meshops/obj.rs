//! Wavefront OBJ subset: `v` and `f` records, optional `vn` on export.
//!
//! Import reads `v x y z [w]` and `f` with `i`, `i/t`, `i//n` or `i/t/n`
//! references (1-based, negative counts back from the latest vertex).
//! Polygons are fan-triangulated; other records are ignored.

use std::fmt::Write;

use super::MeshopsError;
use crate::mesh::{Mesh, Vec3};

pub fn export_obj(mesh: &Mesh) -> String {
    let mut out = String::with_capacity(mesh.vertex_count() * 40 + mesh.face_count() * 20);
    for p in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
    }
    let normals = mesh.normals();
    if let Some(ns) = normals {
        for n in ns {
            let _ = writeln!(out, "vn {} {} {}", n[0], n[1], n[2]);
        }
    }
    for f in mesh.faces() {
        let [a, b, c] = f.map(|i| i + 1);
        if normals.is_some() {
            let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }
    out
}

fn bad(line: usize, msg: impl std::fmt::Display) -> MeshopsError {
    MeshopsError::MalformedAsset(format!("line {line}: {msg}"))
}

pub fn import_obj(text: &str) -> Result<Mesh, MeshopsError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .map(|t| t.parse::<f64>().map_err(|e| bad(line, format!("`{t}`: {e}"))))
                    .collect::<Result<_, _>>()?;
                if !(3..=4).contains(&coords.len()) {
                    return Err(bad(line, format!("vertex has {} coordinates", coords.len())));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(bad(line, "non-finite coordinate"));
                }
                vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let refs: Vec<u32> = tokens
                    .map(|t| resolve(t, vertices.len()).ok_or_else(|| bad(line, format!("bad vertex reference `{t}`"))))
                    .collect::<Result<_, _>>()?;
                if refs.len() < 3 {
                    return Err(bad(line, "face needs at least 3 vertices"));
                }
                for k in 1..refs.len() - 1 {
                    let t = [refs[0], refs[k], refs[k + 1]];
                    if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                        faces.push(t);
                    }
                }
            }
            _ => {}
        }
    }
    Ok(Mesh::new(vertices, faces)?)
}

/// Zero-based index for a face token, given vertices read so far.
fn resolve(token: &str, count: usize) -> Option<u32> {
    let i: i64 = token.split('/').next()?.parse().ok()?;
    let idx = match i {
        0 => return None,
        i if i > 0 => i - 1,
        i => count as i64 + i,
    };
    (0..count as i64).contains(&idx).then_some(idx as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cuboid;

    #[test]
    fn single_triangle() {
        let m = import_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (3, 1));
        assert_eq!(m.faces()[0], [0, 1, 2]);
    }

    #[test]
    fn reference_forms_and_fans() {
        let text = "# quad\no thing\nv 0 0 0\nv 1 0 0\nv 1 1 0 1.0\nv 0 1 0\nvt 0 0\nvn 0 0 1\n\
                    s off\nf 1/1/1 2/1/1 3//1 -1\n";
        let m = import_obj(text).unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn round_trip_exact() {
        let c = cuboid([-0.1, 0.2, 1.0 / 3.0], [0.7, 0.9, 2.0]);
        let back = import_obj(&export_obj(&c)).unwrap();
        assert_eq!(back.vertices(), c.vertices());
        assert_eq!(back.faces(), c.faces());
    }

    #[test]
    fn errors_name_the_line() {
        let e = import_obj("v 0 0 0\nv 1 0\n").unwrap_err();
        assert_eq!(e.to_string(), "malformed asset: line 2: vertex has 2 coordinates");
        assert!(import_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(import_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").is_err());
        assert!(import_obj("v 0 0 x\n").is_err());
    }
}
