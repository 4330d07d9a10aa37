//! Binary glTF 2.0 (.glb) for a single indexed triangle mesh.
//!
//! Export layout: JSON chunk then BIN chunk holding positions (float32 VEC3),
//! optional normals (float32 VEC3) and indices (uint32), each section
//! 4-byte aligned. Import accepts any non-interleaved or strided float32
//! POSITION accessor with uint8/uint16/uint32 or absent indices, from every
//! triangle primitive of the first mesh. Node transforms are ignored.

use serde_json::{json, Value};

use super::MeshopsError;
use crate::mesh::{Mesh, Vec3};

pub const GLB_MAGIC: &[u8; 4] = b"glTF";
pub const GLB_VERSION: u32 = 2;
const CHUNK_JSON: u32 = 0x4E4F_534A;
const CHUNK_BIN: u32 = 0x004E_4942;

const FLOAT: u64 = 5126;
const UNSIGNED_BYTE: u64 = 5121;
const UNSIGNED_SHORT: u64 = 5123;
const UNSIGNED_INT: u64 = 5125;
const TRIANGLES: u64 = 4;

fn pad4(len: usize) -> usize {
    (4 - len % 4) % 4
}

fn min_max(points: &[Vec3]) -> (Vec<f32>, Vec<f32>) {
    let mut lo = [f32::INFINITY; 3];
    let mut hi = [f32::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            let c = p[k] as f32;
            lo[k] = lo[k].min(c);
            hi[k] = hi[k].max(c);
        }
    }
    (lo.to_vec(), hi.to_vec())
}

pub fn export_glb(mesh: &Mesh) -> Result<Vec<u8>, MeshopsError> {
    if mesh.face_count() == 0 {
        return Err(MeshopsError::EmptyMesh);
    }
    let n = mesh.vertex_count();
    if n > u32::MAX as usize || mesh.face_count().checked_mul(12).is_none_or(|b| b > u32::MAX as usize / 2) {
        return Err(MeshopsError::MeshTooLarge(n));
    }

    let mut bin = Vec::with_capacity(n * 24 + mesh.face_count() * 12);
    let push_vec3 = |bin: &mut Vec<u8>, pts: &[Vec3]| {
        for p in pts {
            for c in p {
                bin.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
    };

    let (lo, hi) = min_max(mesh.vertices());
    let mut views = vec![json!({"buffer": 0, "byteOffset": 0, "byteLength": n * 12, "target": 34962})];
    let mut accessors =
        vec![json!({"bufferView": 0, "componentType": FLOAT, "count": n, "type": "VEC3", "min": lo, "max": hi})];
    let mut attributes = json!({"POSITION": 0});
    push_vec3(&mut bin, mesh.vertices());

    if let Some(normals) = mesh.normals() {
        let offset = bin.len();
        push_vec3(&mut bin, normals);
        views.push(json!({"buffer": 0, "byteOffset": offset, "byteLength": n * 12, "target": 34962}));
        accessors.push(json!({"bufferView": views.len() - 1, "componentType": FLOAT, "count": n, "type": "VEC3"}));
        attributes["NORMAL"] = json!(accessors.len() - 1);
    }

    let offset = bin.len();
    for f in mesh.faces() {
        for i in f {
            bin.extend_from_slice(&i.to_le_bytes());
        }
    }
    views.push(json!({"buffer": 0, "byteOffset": offset, "byteLength": bin.len() - offset, "target": 34963}));
    accessors.push(json!({
        "bufferView": views.len() - 1,
        "componentType": UNSIGNED_INT,
        "count": mesh.face_count() * 3,
        "type": "SCALAR",
    }));
    let indices = accessors.len() - 1;

    let doc = json!({
        "asset": {"version": "2.0", "generator": "zonecap"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0}],
        "meshes": [{"primitives": [{"attributes": attributes, "indices": indices, "mode": TRIANGLES}]}],
        "accessors": accessors,
        "bufferViews": views,
        "buffers": [{"byteLength": bin.len()}],
    });

    let mut json_bytes = serde_json::to_vec(&doc).expect("serializable document");
    json_bytes.resize(json_bytes.len() + pad4(json_bytes.len()), b' ');
    bin.resize(bin.len() + pad4(bin.len()), 0);

    let total = 12 + 8 + json_bytes.len() + 8 + bin.len();
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(GLB_MAGIC);
    out.extend_from_slice(&GLB_VERSION.to_le_bytes());
    out.extend_from_slice(&(total as u32).to_le_bytes());
    out.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&CHUNK_JSON.to_le_bytes());
    out.extend_from_slice(&json_bytes);
    out.extend_from_slice(&(bin.len() as u32).to_le_bytes());
    out.extend_from_slice(&CHUNK_BIN.to_le_bytes());
    out.extend_from_slice(&bin);
    Ok(out)
}

fn malformed(msg: impl Into<String>) -> MeshopsError {
    MeshopsError::MalformedAsset(msg.into())
}

fn read_u32(b: &[u8], at: usize) -> Result<u32, MeshopsError> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes(s.try_into().unwrap()))
        .ok_or_else(|| malformed(format!("truncated at byte {at}")))
}

fn field_u64(v: &Value, key: &str) -> Result<u64, MeshopsError> {
    v.get(key).and_then(Value::as_u64).ok_or_else(|| malformed(format!("missing or invalid `{key}`")))
}

struct Glb<'a> {
    doc: Value,
    bin: &'a [u8],
}

impl Glb<'_> {
    fn index<'v>(&'v self, array: &str, i: u64) -> Result<&'v Value, MeshopsError> {
        self.doc
            .get(array)
            .and_then(|a| a.get(i as usize))
            .ok_or_else(|| malformed(format!("{array}[{i}] does not exist")))
    }

    /// Bytes for accessor `i` plus its element stride.
    fn accessor(&self, i: u64, component: &[u64], kind: &str) -> Result<(Vec<&[u8]>, u64), MeshopsError> {
        let acc = self.index("accessors", i)?;
        let ctype = field_u64(acc, "componentType")?;
        if !component.contains(&ctype) {
            return Err(malformed(format!("accessor {i} has component type {ctype}")));
        }
        if acc.get("type").and_then(Value::as_str) != Some(kind) {
            return Err(malformed(format!("accessor {i} is not {kind}")));
        }
        if acc.get("sparse").is_some() {
            return Err(malformed("sparse accessors are not supported"));
        }
        let count = field_u64(acc, "count")? as usize;
        let comp_size = match ctype {
            UNSIGNED_BYTE => 1,
            UNSIGNED_SHORT => 2,
            _ => 4,
        };
        let width = comp_size * if kind == "VEC3" { 3 } else { 1 };
        let view = self.index("bufferViews", field_u64(acc, "bufferView")?)?;
        if field_u64(view, "buffer")? != 0 {
            return Err(malformed("only the embedded buffer is supported"));
        }
        let stride = match view.get("byteStride") {
            None => width,
            Some(s) => s.as_u64().ok_or_else(|| malformed("invalid byteStride"))? as usize,
        };
        if stride < width {
            return Err(malformed(format!("byteStride {stride} below element size {width}")));
        }
        let start = view.get("byteOffset").and_then(Value::as_u64).unwrap_or(0) as usize
            + acc.get("byteOffset").and_then(Value::as_u64).unwrap_or(0) as usize;
        let view_end = view.get("byteOffset").and_then(Value::as_u64).unwrap_or(0) as usize
            + field_u64(view, "byteLength")? as usize;
        if view_end > self.bin.len() {
            return Err(malformed("buffer view exceeds BIN chunk"));
        }
        let mut items = Vec::with_capacity(count);
        for k in 0..count {
            let at = start + k * stride;
            let item = self.bin.get(at..at + width).filter(|_| at + width <= view_end);
            items.push(item.ok_or_else(|| malformed(format!("accessor {i} overruns its buffer view")))?);
        }
        Ok((items, ctype))
    }
}

pub fn import_glb(bytes: &[u8]) -> Result<Mesh, MeshopsError> {
    if bytes.get(0..4) != Some(GLB_MAGIC.as_slice()) {
        return Err(malformed("missing glTF magic"));
    }
    let version = read_u32(bytes, 4)?;
    if version != GLB_VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let total = (read_u32(bytes, 8)? as usize).min(bytes.len());

    let mut json_chunk = None;
    let mut bin_chunk: &[u8] = &[];
    let mut at = 12;
    while at + 8 <= total {
        let len = read_u32(bytes, at)? as usize;
        let kind = read_u32(bytes, at + 4)?;
        let body = bytes.get(at + 8..at + 8 + len).ok_or_else(|| malformed("chunk exceeds file"))?;
        match kind {
            CHUNK_JSON if json_chunk.is_none() => json_chunk = Some(body),
            CHUNK_BIN if bin_chunk.is_empty() => bin_chunk = body,
            _ => {}
        }
        at += 8 + len;
    }
    let doc: Value = serde_json::from_slice(json_chunk.ok_or_else(|| malformed("no JSON chunk"))?)
        .map_err(|e| malformed(format!("JSON chunk: {e}")))?;
    let glb = Glb { doc, bin: bin_chunk };

    let primitives = glb
        .index("meshes", 0)?
        .get("primitives")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("mesh has no primitives"))?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for prim in primitives {
        if prim.get("mode").and_then(Value::as_u64).unwrap_or(TRIANGLES) != TRIANGLES {
            continue;
        }
        let pos_idx = prim
            .get("attributes")
            .and_then(|a| a.get("POSITION"))
            .and_then(Value::as_u64)
            .ok_or_else(|| malformed("primitive without POSITION"))?;
        let (pos, _) = glb.accessor(pos_idx, &[FLOAT], "VEC3")?;
        let base = vertices.len() as u32;
        for item in &pos {
            let c = |k: usize| f32::from_le_bytes(item[4 * k..4 * k + 4].try_into().unwrap()) as f64;
            vertices.push([c(0), c(1), c(2)]);
        }
        let idx: Vec<u32> = match prim.get("indices").and_then(Value::as_u64) {
            None => (0..pos.len() as u32).collect(),
            Some(i) => {
                let (items, ctype) = glb.accessor(i, &[UNSIGNED_BYTE, UNSIGNED_SHORT, UNSIGNED_INT], "SCALAR")?;
                items
                    .iter()
                    .map(|b| match ctype {
                        UNSIGNED_BYTE => b[0] as u32,
                        UNSIGNED_SHORT => u16::from_le_bytes([b[0], b[1]]) as u32,
                        _ => u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
                    })
                    .collect()
            }
        };
        if idx.len() % 3 != 0 {
            return Err(malformed(format!("{} indices is not a multiple of 3", idx.len())));
        }
        for t in idx.chunks_exact(3) {
            if let Some(&bad) = t.iter().find(|&&i| i as usize >= pos.len()) {
                return Err(malformed(format!("index {bad} out of range")));
            }
            faces.push([base + t[0], base + t[1], base + t[2]]);
        }
    }
    Mesh::new(vertices, faces).map_err(|e| malformed(e.to_string()))
}
