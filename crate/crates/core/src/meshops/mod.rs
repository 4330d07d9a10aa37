//! Mesh simplification and asset interchange.

mod decimate;
mod gltf;
mod obj;
mod quadric;

pub use decimate::{decimate, decimate_with_report, DecimationParams, DecimationReport};
pub use gltf::{export_glb, import_glb, GLB_MAGIC, GLB_VERSION};
pub use obj::{export_obj, import_obj};
pub use quadric::{compute_quadrics, Quadric};

use thiserror::Error;

use crate::mesh::MeshError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshopsError {
    #[error("edge ({0}, {1}) is shared by more than two faces")]
    NotManifold(u32, u32),
    #[error("target of {0} vertices is below the minimum of 4")]
    TargetTooSmall(usize),
    #[error("vertex {0} has only zero-area faces")]
    DegenerateFace(usize),
    #[error("mesh with {0} vertices cannot be indexed with u32")]
    MeshTooLarge(usize),
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("malformed asset: {0}")]
    MalformedAsset(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
