//! Reference-cell lookup tables and the table-driven stiffness assembly.
//!
//! The table stores, for every co-occurring node pair `(i, j)`, every
//! polynomial basis function `q` and every reference-derivative pair
//! `(a, b)`, the integral of `P_q * dN_i/dxi_a * dN_j/dxi_b` over the
//! reference cell. Contracting these integrals with a cell's polynomial
//! coefficients produces that cell's stiffness matrix; the contraction can
//! also be applied matrix-free.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::geometry::ReferenceCell;
use crate::linalg::{SparseSymBuilder, SparseSymMatrix};

use super::material::pack_index;
use super::pullback::PolyCoeffs;
use super::quadrature::{chebyshev_gauss_lobatto, element_nodes, gauss_legendre, lagrange_basis};

/// Precomputed reference-cell integrals shared by all cells.
#[derive(Debug, Clone)]
pub struct LookupTable {
    pub dim: usize,
    pub fit_degree: usize,
    pub n_basis: usize,
    n_nodes: usize,
    /// Node pairs `(i, j)` with `i >= j`, sorted.
    pairs: Vec<(usize, usize)>,
    pair_of: BTreeMap<(usize, usize), usize>,
    /// Layout: `((pair * n_basis + q) * d + a) * d + b`.
    entries: Vec<f64>,
}

/// Tensor-product shape values and local derivatives at one quadrature point.
struct ShapePoint {
    weight: f64,
    local: [f64; 3],
    values: Vec<f64>,
    /// derivative w.r.t. the element-local coordinate, per axis
    derivs: Vec<[f64; 3]>,
}

/// Shape data at a tensor grid of Gauss points, shared by all elements.
fn element_shape_points(dim: usize, degree: usize, n_gl: usize) -> Vec<ShapePoint> {
    let (gp, gw) = gauss_legendre(n_gl);
    let nodes = element_nodes(degree);
    let per_axis: Vec<(Vec<f64>, Vec<f64>)> =
        gp.iter().map(|&t| lagrange_basis(&nodes, t)).collect();
    let m = degree + 1;
    let n_loc = m.pow(dim as u32);
    let total = n_gl.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for g in 0..total {
        let mut rem = g;
        let mut gi = [0usize; 3];
        for axis_g in gi.iter_mut().take(dim) {
            *axis_g = rem % n_gl;
            rem /= n_gl;
        }
        let mut weight = 1.0;
        let mut local = [0.0f64; 3];
        for a in 0..dim {
            weight *= gw[gi[a]];
            local[a] = gp[gi[a]];
        }
        let mut values = vec![0.0; n_loc];
        let mut derivs = vec![[0.0f64; 3]; n_loc];
        for l in 0..n_loc {
            let mut rem = l;
            let mut v = 1.0;
            let mut d = [1.0f64; 3];
            for a in 0..dim {
                let li = rem % m;
                rem /= m;
                let (vals, ders) = &per_axis[gi[a]];
                v *= vals[li];
                for (ax, dval) in d.iter_mut().enumerate().take(dim) {
                    *dval *= if ax == a { ders[li] } else { vals[li] };
                }
            }
            values[l] = v;
            for a in 0..dim {
                derivs[l][a] = d[a];
            }
        }
        out.push(ShapePoint {
            weight,
            local,
            values,
            derivs,
        });
    }
    out
}

pub(crate) struct ShapeData(Vec<ShapePoint>);

impl ShapeData {
    pub fn weight(&self, g: usize) -> f64 {
        self.0[g].weight
    }
    pub fn local(&self, g: usize) -> [f64; 3] {
        self.0[g].local
    }
    pub fn value(&self, g: usize, l: usize) -> f64 {
        self.0[g].values[l]
    }
    pub fn local_deriv(&self, g: usize, l: usize) -> [f64; 3] {
        self.0[g].derivs[l]
    }
    pub fn n_points(&self) -> usize {
        self.0.len()
    }
}

pub(crate) fn shape_data(dim: usize, degree: usize, n_gl: usize) -> ShapeData {
    ShapeData(element_shape_points(dim, degree, n_gl))
}

/// Gauss points per direction that integrate the table entries exactly.
pub(crate) fn table_rule(degree: usize, fit_degree: usize) -> usize {
    degree + fit_degree.div_ceil(2) + 1
}

/// Build the lookup table for a reference cell and polynomial fit degree.
///
/// Exchange symmetry `entry(q,i,a,j,b) = entry(q,j,b,i,a)` holds exactly:
/// only the `i >= j` triangle is computed and stored.
pub fn build_lookup_table(rc: &ReferenceCell, fit_degree: usize) -> LookupTable {
    let d = rc.dim;
    let n_gl = table_rule(rc.degree, fit_degree);
    let shapes = shape_data(d, rc.degree, n_gl);
    let poly_nodes = chebyshev_gauss_lobatto(fit_degree);
    let pm = poly_nodes.len();
    let n_basis = pm.pow(d as u32);

    // collect pairs
    let mut pair_of = BTreeMap::new();
    for e in &rc.elements {
        for (la, &na) in e.nodes.iter().enumerate() {
            for &nb in e.nodes.iter().skip(la) {
                let key = if na >= nb { (na, nb) } else { (nb, na) };
                pair_of.entry(key).or_insert(0usize);
            }
        }
    }
    let pairs: Vec<(usize, usize)> = pair_of.keys().copied().collect();
    for (idx, (_, v)) in pair_of.iter_mut().enumerate() {
        *v = idx;
    }

    let d2 = d * d;
    let mut entries = vec![0.0f64; pairs.len() * n_basis * d2];

    let vol: f64 = (0..d).map(|a| rc.elements[0].h[a]).product();
    for e in &rc.elements {
        for g in 0..shapes.n_points() {
            let local = shapes.local(g);
            // global parametric coordinates and polynomial basis values
            let mut xi = [0.0f64; 3];
            for a in 0..d {
                xi[a] = e.origin[a] + e.h[a] * local[a];
            }
            let per_axis: Vec<Vec<f64>> = (0..d)
                .map(|a| lagrange_basis(&poly_nodes, xi[a]).0)
                .collect();
            let mut pvals = vec![0.0f64; n_basis];
            for (q, pv) in pvals.iter_mut().enumerate() {
                let mut rem = q;
                let mut w = 1.0;
                for axis_vals in per_axis.iter().take(d) {
                    w *= axis_vals[rem % pm];
                    rem /= pm;
                }
                *pv = w;
            }
            let w_meas = shapes.weight(g) * vol;

            for (la, &na) in e.nodes.iter().enumerate() {
                let da = shapes.local_deriv(g, la);
                for (lb, &nb) in e.nodes.iter().enumerate() {
                    if na < nb {
                        continue;
                    }
                    let pair = pair_of[&(na, nb)];
                    let db = shapes.local_deriv(g, lb);
                    for (q, &pv) in pvals.iter().enumerate() {
                        let base = (pair * n_basis + q) * d2;
                        let wq = w_meas * pv;
                        for a in 0..d {
                            // local derivative -> reference-cell derivative
                            let ga = da[a] / e.h[a];
                            for b in 0..d {
                                let gb = db[b] / e.h[b];
                                entries[base + a * d + b] += wq * ga * gb;
                            }
                        }
                    }
                }
            }
        }
    }

    LookupTable {
        dim: d,
        fit_degree,
        n_basis,
        n_nodes: rc.n_nodes(),
        pairs,
        pair_of,
        entries,
    }
}

impl LookupTable {
    /// Table entry with exchange symmetry expanded.
    pub fn entry(&self, q: usize, i: usize, a: usize, j: usize, b: usize) -> f64 {
        let d = self.dim;
        let (key, ra, rb) = if i >= j { ((i, j), a, b) } else { ((j, i), b, a) };
        match self.pair_of.get(&key) {
            Some(&pair) => self.entries[(pair * self.n_basis + q) * d * d + ra * d + rb],
            None => 0.0,
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Assemble a cell stiffness by contracting the table with coefficients.
    pub fn assemble(&self, coeffs: &PolyCoeffs) -> SparseSymMatrix {
        assert_eq!(coeffs.n_basis, self.n_basis, "fit degree mismatch");
        let d = self.dim;
        let d2 = d * d;
        let n_dofs = d * self.n_nodes;
        let mut builder = SparseSymBuilder::with_capacity(n_dofs, self.pairs.len() * d2);
        for (pair, &(i, j)) in self.pairs.iter().enumerate() {
            for c1 in 0..d {
                let c2_end = if i == j { c1 + 1 } else { d };
                for c2 in 0..c2_end {
                    let mut acc = 0.0;
                    for q in 0..self.n_basis {
                        let base = (pair * self.n_basis + q) * d2;
                        let coef = &coeffs.values[q * coeffs.n_components..];
                        for a in 0..d {
                            for b in 0..d {
                                acc += coef[pack_index(d2, c1 * d + a, c2 * d + b)]
                                    * self.entries[base + a * d + b];
                            }
                        }
                    }
                    builder.push(i * d + c1, j * d + c2, acc);
                }
            }
        }
        builder.build()
    }

    /// Matrix-free product `y += K(coeffs) * x` without forming the matrix.
    pub fn apply_add(&self, coeffs: &PolyCoeffs, x: &DVector<f64>, y: &mut DVector<f64>) {
        assert_eq!(coeffs.n_basis, self.n_basis, "fit degree mismatch");
        let d = self.dim;
        let d2 = d * d;
        assert_eq!(x.len(), d * self.n_nodes);
        for (pair, &(i, j)) in self.pairs.iter().enumerate() {
            for c1 in 0..d {
                let c2_end = if i == j { c1 + 1 } else { d };
                for c2 in 0..c2_end {
                    let mut acc = 0.0;
                    for q in 0..self.n_basis {
                        let base = (pair * self.n_basis + q) * d2;
                        let coef = &coeffs.values[q * coeffs.n_components..];
                        for a in 0..d {
                            for b in 0..d {
                                acc += coef[pack_index(d2, c1 * d + a, c2 * d + b)]
                                    * self.entries[base + a * d + b];
                            }
                        }
                    }
                    let (di, dj) = (i * d + c1, j * d + c2);
                    y[di] += acc * x[dj];
                    if di != dj {
                        y[dj] += acc * x[di];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{fit_poly_coeffs, Material};
    use crate::geometry::{build_reference_cell, CellPattern, MacroMapping};
    use approx::assert_relative_eq;

    #[test]
    fn exchange_symmetry_is_exact() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 1, 0.25).unwrap();
        let table = build_lookup_table(&rc, 2);
        // spot checks across the pattern, including the transposed retrieval
        for i in 0..rc.n_nodes() {
            for j in 0..rc.n_nodes() {
                for q in [0usize, 4, 8] {
                    for a in 0..2 {
                        for b in 0..2 {
                            let lhs = table.entry(q, i, a, j, b);
                            let rhs = table.entry(q, j, b, i, a);
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    /// Single bilinear element, constant basis: entries are the classical
    /// gradient-product integrals of the unit square.
    #[test]
    fn single_element_entries_match_hand_quadrature() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 0, 0.25).unwrap();
        let table = build_lookup_table(&rc, 0);
        // independent 2-point Gauss oracle on the unit square
        let g = [0.5 - 0.5 / 3.0f64.sqrt(), 0.5 + 0.5 / 3.0f64.sqrt()];
        let shape = |l: usize, x: f64, y: f64| -> (f64, [f64; 2]) {
            let (lx, ly) = (l % 2, l / 2);
            let vx = if lx == 0 { 1.0 - x } else { x };
            let vy = if ly == 0 { 1.0 - y } else { y };
            let dx = if lx == 0 { -1.0 } else { 1.0 };
            let dy = if ly == 0 { -1.0 } else { 1.0 };
            (vx * vy, [dx * vy, vx * dy])
        };
        for i in 0..4 {
            for j in 0..4 {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut acc = 0.0;
                        for &x in &g {
                            for &y in &g {
                                let (_, di) = shape(i, x, y);
                                let (_, dj) = shape(j, x, y);
                                acc += 0.25 * di[a] * dj[b];
                            }
                        }
                        assert_relative_eq!(
                            table.entry(0, i, a, j, b),
                            acc,
                            epsilon = 1e-14
                        );
                    }
                }
            }
        }
    }

    /// Identity mapping: assembling with the constant pulled-back field must
    /// reproduce the quadrature stiffness of the identity-mapped cell.
    #[test]
    fn identity_mapping_assembly_matches_quadrature() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 1, 0.25).unwrap();
        let mat = Material::new(2, 5000.0, 0.4).unwrap();
        let mapping = MacroMapping::identity(2);
        for q in [0usize, 2] {
            let table = build_lookup_table(&rc, q);
            let coeffs = fit_poly_coeffs(0, &mapping, &mat, q).unwrap();
            let k_table = table.assemble(&coeffs);
            let k_quad = crate::assembly::assemble_stiffness_quadrature(
                &rc,
                &mapping,
                &mat,
                crate::assembly::GeometryMode::Isoparametric,
            )
            .unwrap();
            let diff = (k_table.to_dense() - k_quad.to_dense()).norm();
            let scale = k_quad.to_dense().norm();
            assert!(diff / scale <= 1e-12, "relative diff {}", diff / scale);
        }
    }

    #[test]
    fn matrix_free_product_matches_assembled() {
        let rc = build_reference_cell(CellPattern::CrossHollowSquare2d, 1, 0, 0.25).unwrap();
        let mat = Material::new(2, 5000.0, 0.4).unwrap();
        let mapping = MacroMapping::affine_box(2, [0.0; 3], [2.0, 1.0, 0.0]);
        let table = build_lookup_table(&rc, 2);
        let coeffs = fit_poly_coeffs(0, &mapping, &mat, 2).unwrap();
        let k = table.assemble(&coeffs);
        let x = DVector::from_fn(rc.n_dofs(), |i, _| ((i * 13 % 7) as f64 - 3.0) * 0.5);
        let mut y = DVector::zeros(rc.n_dofs());
        table.apply_add(&coeffs, &x, &mut y);
        let y_ref = k.matvec(&x);
        assert_relative_eq!(y, y_ref, epsilon = 1e-9 * y_ref.norm().max(1.0));
    }
}
