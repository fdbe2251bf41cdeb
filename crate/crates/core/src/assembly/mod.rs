//! Stiffness and load assembly.
//!
//! Each cell's bilinear form is pulled back onto the reference cell; the
//! dependence on the macro mapping is captured by a tensor field that is
//! interpolated by polynomials per cell. Reference-cell integrals contracted
//! with those polynomial coefficients then assemble every cell stiffness
//! from one shared lookup table. A direct quadrature path provides the
//! independent oracle and the load vectors.

mod lookup;
mod material;
mod pullback;
mod quad_assembly;
mod quadrature;

pub use lookup::{build_lookup_table, LookupTable};
pub use material::{grad_pair_count, pack_index, Material};
pub use pullback::{fit_poly_coeffs, pulled_back_field, PolyCoeffs};
pub use quad_assembly::{
    assemble_local_rhs, assemble_stiffness_quadrature, GeometryMode, TractionSpec,
};
pub use quadrature::{chebyshev_gauss_lobatto, gauss_legendre, lagrange_basis};
