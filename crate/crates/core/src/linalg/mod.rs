//! Dense/sparse symmetric linear algebra and Krylov kernels.
//!
//! Everything here is self-contained: sparse symmetric storage, a sparse
//! Cholesky factorization with a fill-reducing ordering (dense fallback for
//! small matrices), and the iterative solvers (PCG, flexible GMRES, MINRES)
//! used by the domain-decomposition algorithms.

mod cholesky;
mod krylov;
mod ordering;
mod sparse;

pub use cholesky::{cholesky, dense_cholesky_lower, CholeskyFactor, DENSE_FACTOR_LIMIT};
pub use krylov::{fgmres, minres, pcg, IterStats, KrylovFailure, KrylovFailureKind};
pub use ordering::reverse_cuthill_mckee;
pub use sparse::{SparseSymMatrix, SparseSymBuilder};
