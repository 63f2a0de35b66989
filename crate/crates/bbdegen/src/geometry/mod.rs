//! Exact lattice and polyhedral kernel.

pub mod dd;
pub mod lattice;
pub mod linalg;
pub mod polyhedron;
pub mod text;

pub use lattice::{hnf_with_transform, smith_invariants, LatticeQuotient};
pub use linalg::{Int, QVec, Rat, ZVec};
pub use polyhedron::*;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("empty input")]
    EmptyInput,
    #[error("ambient dimensions do not match")]
    DimensionMismatch,
    #[error("polyhedron contains a line")]
    NotPointed,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("inequalities are infeasible")]
    Infeasible,
    #[error("origin is not an interior point")]
    OriginNotInterior,
    #[error("not a face of the polyhedron")]
    NotAFace,
    #[error("empty face")]
    EmptyFace,
    #[error("face is not proper")]
    ImproperFace,
    #[error("vertices are not integral")]
    NonIntegral,
    #[error("parse error: {0}")]
    Parse(String),
}
