use alloc::string::String;

use crate::assembly::PenaltyReport;
use crate::solver::SolveReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteVertex { vertex: usize },

    #[error("triangle {triangle} references vertex {vertex}, but only {count} vertices exist")]
    VertexOutOfRange {
        triangle: usize,
        vertex: usize,
        count: usize,
    },

    #[error("triangle {triangle} repeats a vertex")]
    RepeatedVertex { triangle: usize },

    #[error("triangle {triangle} has zero area")]
    DegenerateTriangle { triangle: usize },

    #[error("edge ({a}, {b}) is shared by more than two triangles")]
    NonManifoldEdge { a: usize, b: usize },

    #[error("hanging node: vertex {vertex} lies inside edge ({a}, {b})")]
    HangingNode { vertex: usize, a: usize, b: usize },

    #[error(
        "penalty {} is not admissible for {} (needs alpha > {})",
        .0.alpha, .0.method, .0.alpha_min
    )]
    InadmissiblePenalty(PenaltyReport),

    #[error(
        "conjugate gradients stopped after {} iterations at relative residual {:e}",
        .0.iterations, .0.relative_residual
    )]
    SolverDiverged(SolveReport),

    #[error("matrix is not positive definite (row {row})")]
    NotPositiveDefinite { row: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range ({len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("history is empty")]
    EmptyHistory,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
