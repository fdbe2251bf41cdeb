//! Lattice geometry: the reference unit-cell mesh and the per-cell Bezier
//! macro mappings whose composition defines each physical cell.

mod bezier;
mod macro_model;
mod reference_cell;

pub use bezier::MacroMapping;
pub use macro_model::{build_macro_model, BezierPatch, MacroModel};
pub use reference_cell::{build_reference_cell, CellPattern, Element, NodeClass, ReferenceCell};

/// Determinant of a padded 3x3 Jacobian as returned by
/// [`MacroMapping::evaluate`].
pub fn det3_of(j: &[[f64; 3]; 3]) -> f64 {
    bezier::det3(j)
}

/// Inverse of a padded 3x3 Jacobian.
pub fn inv3_of(j: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    bezier::inv3(j)
}
