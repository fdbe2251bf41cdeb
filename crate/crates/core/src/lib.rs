//! Domain-decomposition solvers for linear-elastic lattice structures.
//!
//! A lattice is modelled as a grid of cells, each the image of one shared
//! reference unit-cell under a (possibly rational) Bezier macro mapping.
//! Per-cell stiffness matrices are assembled by contracting reference-cell
//! lookup tables with polynomial coefficients of the pulled-back elasticity
//! field, so the expensive integrals are computed once for all cells.
//!
//! Two solvers operate on the resulting dual-primal decomposition:
//!
//! * [`fetidp`]: the standard FETI-DP algorithm (interface problem solved by
//!   PCG with the Dirichlet preconditioner), which factorizes every local
//!   problem;
//! * [`ifetidp`]: an inexact variant that iterates on the full saddle system
//!   with a block preconditioner whose local solves are approximated in
//!   reduced bases spanned by a few greedily selected "principal" cells,
//!   so that only those principal local problems are ever factorized.

pub mod assembly;
pub mod decomposition;
pub mod error;
pub mod fetidp;
pub mod geometry;
pub mod ifetidp;
pub mod linalg;
pub mod problem;
pub mod rom;

pub use error::Error;
pub use linalg::{CholeskyFactor, IterStats, SparseSymMatrix};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
