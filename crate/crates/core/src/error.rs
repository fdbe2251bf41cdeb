//! Error type shared by all solver modules.

use thiserror::Error;

/// Errors produced while building geometry, assembling operators, or solving.
#[derive(Debug, Error)]
pub enum Error {
    /// A Cholesky pivot was non-positive: the matrix is not positive
    /// definite. For local problems this usually signals a floating cell
    /// (no primal constraints) or a mechanically deficient pattern.
    #[error("matrix not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// Iterative solver hit its iteration cap without converging.
    #[error("{solver} did not converge in {iterations} iterations (residual {residual:.3e})")]
    MaxIterations {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Arnoldi normalization fell below 1e-14 while the residual was nonzero.
    #[error("GMRES breakdown at iteration {iteration} (h = {h:.3e})")]
    Breakdown { iteration: usize, h: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown cell pattern `{0}`")]
    UnknownPattern(String),

    /// A macro mapping has a non-positive Jacobian determinant somewhere.
    #[error("degenerate macro mapping: det J = {det:.3e} at sample {at:?}")]
    DegenerateJacobian { det: f64, at: [f64; 3] },

    /// A cell ended up with no primal DOF; its local problem would be singular.
    #[error("cell {0} has no primal degrees of freedom")]
    EmptyPrimalSet(usize),

    /// Duplicate or dependent constraint rows were detected in the jump operator.
    #[error("jump operator is rank deficient: {0}")]
    RankDeficient(String),

    /// A requested traction face does not lie on the exterior boundary.
    #[error("face {0} is not on the lattice boundary")]
    FaceNotOnBoundary(String),

    /// A reduced Gram system was singular beyond the configured fallbacks.
    #[error("singular Gram system in ROM projection (cell {0})")]
    SingularGram(usize),

    /// The principal-cell coordinate matrix of the greedy basis is singular.
    #[error("singular change of basis (pivot {pivot:.3e} at basis index {index})")]
    SingularBasisChange { index: usize, pivot: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
