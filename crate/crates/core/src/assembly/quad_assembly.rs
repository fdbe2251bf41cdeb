//! Direct quadrature assembly of one cell's stiffness and loads.
//!
//! This path never touches the lookup tables, so it doubles as the
//! independent oracle for them. Geometry can be handled two ways: the
//! isoparametric mode interpolates the mapped node positions in the element
//! shape functions (the discretization proper, which annihilates rigid-body
//! modes exactly), while the exact-map mode evaluates the macro mapping's
//! Jacobian at the quadrature points (the limit the polynomial-fitted
//! tables converge to).

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::geometry::{MacroMapping, ReferenceCell};
use crate::linalg::{SparseSymBuilder, SparseSymMatrix};

use super::lookup::{shape_data, table_rule};
use super::material::Material;
use super::quadrature::{element_nodes, gauss_legendre, lagrange_basis};

/// How element geometry enters the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryMode {
    /// Geometry interpolated from mapped nodal positions (the model).
    Isoparametric,
    /// Exact macro-mapping Jacobians at quadrature points.
    ExactMap,
}

/// A constant traction applied on one face of the unit cell.
#[derive(Debug, Clone, Copy)]
pub struct TractionSpec {
    pub axis: usize,
    /// `false` for the `xi_axis = 0` face, `true` for `xi_axis = 1`.
    pub side: bool,
    pub value: [f64; 3],
}

/// Assemble a cell stiffness by direct quadrature.
pub fn assemble_stiffness_quadrature(
    rc: &ReferenceCell,
    mapping: &MacroMapping,
    material: &Material,
    mode: GeometryMode,
) -> Result<SparseSymMatrix, Error> {
    let d = rc.dim;
    let n_gl = table_rule(rc.degree, 2);
    let shapes = shape_data(d, rc.degree, n_gl);
    let c = material.grad_operator();
    let n_loc = (rc.degree + 1).pow(d as u32);
    let n_ldofs = n_loc * d;

    let mut builder = SparseSymBuilder::with_capacity(rc.n_dofs(), rc.elements.len() * n_ldofs);
    let mut k_e = DMatrix::<f64>::zeros(n_ldofs, n_ldofs);
    let mut grads = vec![[0.0f64; 3]; n_loc];

    for e in &rc.elements {
        // mapped nodal positions (isoparametric geometry)
        let xs: Vec<[f64; 3]> = e
            .nodes
            .iter()
            .enumerate()
            .map(|(l, _)| {
                let mut xi = [0.0f64; 3];
                let m = rc.degree + 1;
                let mut rem = l;
                for a in 0..d {
                    xi[a] = e.origin[a] + e.h[a] * ((rem % m) as f64 / rc.degree as f64);
                    rem /= m;
                }
                mapping.evaluate(&xi).0
            })
            .collect();

        k_e.fill(0.0);
        for g in 0..shapes.n_points() {
            let local = shapes.local(g);
            let mut xi = [0.0f64; 3];
            for a in 0..d {
                xi[a] = e.origin[a] + e.h[a] * local[a];
            }

            // geometry Jacobian w.r.t. the reference-cell coordinates
            let mut jac = [[0.0f64; 3]; 3];
            match mode {
                GeometryMode::Isoparametric => {
                    for (l, x) in xs.iter().enumerate() {
                        let dl = shapes.local_deriv(g, l);
                        for i in 0..d {
                            for a in 0..d {
                                jac[i][a] += x[i] * dl[a] / e.h[a];
                            }
                        }
                    }
                    for a in d..3 {
                        jac[a][a] = 1.0;
                    }
                }
                GeometryMode::ExactMap => {
                    jac = mapping.evaluate(&xi).1;
                }
            }
            let det = crate::geometry::det3_of(&jac);
            if det <= 0.0 {
                return Err(Error::DegenerateJacobian { det, at: xi });
            }
            let jinv = crate::geometry::inv3_of(&jac);

            // physical gradients of the shape functions
            for (l, grad) in grads.iter_mut().enumerate() {
                let dl = shapes.local_deriv(g, l);
                for gj in grad.iter_mut().take(d) {
                    *gj = 0.0;
                }
                for j in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        acc += dl[a] / e.h[a] * jinv[a][j];
                    }
                    grad[j] = acc;
                }
            }

            let vol: f64 = (0..d).map(|a| e.h[a]).product();
            let w = shapes.weight(g) * vol * det;

            for la in 0..n_loc {
                for lb in 0..n_loc {
                    for c1 in 0..d {
                        for c2 in 0..d {
                            let mut acc = 0.0;
                            for j in 0..d {
                                for l2 in 0..d {
                                    acc += c[(c1 * d + j, c2 * d + l2)]
                                        * grads[la][j]
                                        * grads[lb][l2];
                                }
                            }
                            k_e[(la * d + c1, lb * d + c2)] += w * acc;
                        }
                    }
                }
            }
        }

        // scatter the lower triangle in cell-DOF numbering
        for (la, &na) in e.nodes.iter().enumerate() {
            for (lb, &nb) in e.nodes.iter().enumerate() {
                if na < nb {
                    continue;
                }
                for c1 in 0..d {
                    let c2_end = if na == nb { c1 + 1 } else { d };
                    for c2 in 0..c2_end {
                        builder.push(na * d + c1, nb * d + c2, k_e[(la * d + c1, lb * d + c2)]);
                    }
                }
            }
        }
    }
    Ok(builder.build())
}

/// Assemble a cell load vector from a body force and face tractions by
/// direct quadrature (isoparametric geometry).
pub fn assemble_local_rhs(
    rc: &ReferenceCell,
    mapping: &MacroMapping,
    body_force: Option<[f64; 3]>,
    tractions: &[TractionSpec],
) -> Result<DVector<f64>, Error> {
    let d = rc.dim;
    let mut f = DVector::zeros(rc.n_dofs());

    if let Some(b) = body_force {
        if b.iter().take(d).any(|&v| v != 0.0) {
            let n_gl = rc.degree + 2;
            let shapes = shape_data(d, rc.degree, n_gl);
            let n_loc = (rc.degree + 1).pow(d as u32);
            for e in &rc.elements {
                let xs = element_positions(rc, e, mapping);
                for g in 0..shapes.n_points() {
                    let mut jac = [[0.0f64; 3]; 3];
                    for (l, x) in xs.iter().enumerate() {
                        let dl = shapes.local_deriv(g, l);
                        for i in 0..d {
                            for a in 0..d {
                                jac[i][a] += x[i] * dl[a] / e.h[a];
                            }
                        }
                    }
                    for a in d..3 {
                        jac[a][a] = 1.0;
                    }
                    let det = crate::geometry::det3_of(&jac);
                    if det <= 0.0 {
                        return Err(Error::DegenerateJacobian {
                            det,
                            at: e.origin,
                        });
                    }
                    let vol: f64 = (0..d).map(|a| e.h[a]).product();
                    let w = shapes.weight(g) * vol * det;
                    for l in 0..n_loc {
                        let nv = shapes.value(g, l);
                        for c in 0..d {
                            f[e.nodes[l] * d + c] += w * nv * b[c];
                        }
                    }
                }
            }
        }
    }

    for t in tractions {
        integrate_traction(rc, mapping, t, &mut f)?;
    }
    Ok(f)
}

fn element_positions(
    rc: &ReferenceCell,
    e: &crate::geometry::Element,
    mapping: &MacroMapping,
) -> Vec<[f64; 3]> {
    let d = rc.dim;
    let m = rc.degree + 1;
    e.nodes
        .iter()
        .enumerate()
        .map(|(l, _)| {
            let mut xi = [0.0f64; 3];
            let mut rem = l;
            for a in 0..d {
                xi[a] = e.origin[a] + e.h[a] * ((rem % m) as f64 / rc.degree as f64);
                rem /= m;
            }
            mapping.evaluate(&xi).0
        })
        .collect()
}

fn integrate_traction(
    rc: &ReferenceCell,
    mapping: &MacroMapping,
    t: &TractionSpec,
    f: &mut DVector<f64>,
) -> Result<(), Error> {
    let d = rc.dim;
    if t.axis >= d {
        return Err(Error::FaceNotOnBoundary(format!(
            "axis {} out of range for dimension {d}",
            t.axis
        )));
    }
    let n_gl = rc.degree + 2;
    let (gp, gw) = gauss_legendre(n_gl);
    let nodes_1d = element_nodes(rc.degree);
    let m = rc.degree + 1;
    let n_loc = m.pow(d as u32);
    let tangent_axes: Vec<usize> = (0..d).filter(|&a| a != t.axis).collect();
    let face_fixed = if t.side { 1.0 } else { 0.0 };

    for &ei in &rc.boundary_elements(t.axis, t.side) {
        let e = &rc.elements[ei];
        let xs = element_positions(rc, e, mapping);
        let total = n_gl.pow(tangent_axes.len() as u32);
        for g in 0..total {
            // local face coordinates
            let mut rem = g;
            let mut local = [0.0f64; 3];
            local[t.axis] = face_fixed;
            let mut w_face = 1.0;
            for &a in &tangent_axes {
                local[a] = gp[rem % n_gl];
                w_face *= gw[rem % n_gl];
                rem /= n_gl;
            }
            // shape values and local derivatives at the face point
            let per_axis: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
                .map(|a| lagrange_basis(&nodes_1d, local[a]))
                .collect();
            let mut values = vec![0.0f64; n_loc];
            let mut derivs = vec![[0.0f64; 3]; n_loc];
            for l in 0..n_loc {
                let mut rem = l;
                let mut v = 1.0;
                let mut dv = [1.0f64; 3];
                for a in 0..d {
                    let li = rem % m;
                    rem /= m;
                    v *= per_axis[a].0[li];
                    for (ax, dval) in dv.iter_mut().enumerate().take(d) {
                        *dval *= if ax == a {
                            per_axis[a].1[li]
                        } else {
                            per_axis[a].0[li]
                        };
                    }
                }
                values[l] = v;
                derivs[l] = dv;
            }
            // tangent vectors of the isoparametric face map
            let mut tangents = [[0.0f64; 3]; 2];
            for (ti, &a) in tangent_axes.iter().enumerate() {
                for (l, x) in xs.iter().enumerate() {
                    for i in 0..d {
                        // derivative w.r.t. the element-local coordinate of axis a
                        tangents[ti][i] += x[i] * derivs[l][a];
                    }
                }
            }
            let measure = match tangent_axes.len() {
                1 => (tangents[0][0].powi(2) + tangents[0][1].powi(2)).sqrt(),
                2 => {
                    let c = [
                        tangents[0][1] * tangents[1][2] - tangents[0][2] * tangents[1][1],
                        tangents[0][2] * tangents[1][0] - tangents[0][0] * tangents[1][2],
                        tangents[0][0] * tangents[1][1] - tangents[0][1] * tangents[1][0],
                    ];
                    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
                }
                _ => unreachable!(),
            };
            let w = w_face * measure;
            for l in 0..n_loc {
                for c in 0..d {
                    f[e.nodes[l] * d + c] += w * values[l] * t.value[c];
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_reference_cell, CellPattern};
    use approx::assert_relative_eq;

    fn unit_material() -> Material {
        Material::new(2, 1.0, 0.0).unwrap()
    }

    /// Independent oracle: classical B-matrix (Voigt) assembly of the Q4
    /// plane-strain element on the unit square.
    fn q4_voigt_stiffness(e_mod: f64, nu: f64) -> DMatrix<f64> {
        // plane strain D matrix
        let f = e_mod / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let d_mat = DMatrix::from_row_slice(
            3,
            3,
            &[
                f * (1.0 - nu),
                f * nu,
                0.0,
                f * nu,
                f * (1.0 - nu),
                0.0,
                0.0,
                0.0,
                f * (1.0 - 2.0 * nu) / 2.0,
            ],
        );
        let g = [0.5 - 0.5 / 3.0f64.sqrt(), 0.5 + 0.5 / 3.0f64.sqrt()];
        let mut k = DMatrix::zeros(8, 8);
        for &x in &g {
            for &y in &g {
                // node order: (0,0), (1,0), (0,1), (1,1) to match lexicographic
                let dn = [
                    [-(1.0 - y), -(1.0 - x)],
                    [1.0 - y, -x],
                    [-y, 1.0 - x],
                    [y, x],
                ];
                let mut b = DMatrix::zeros(3, 8);
                for l in 0..4 {
                    b[(0, 2 * l)] = dn[l][0];
                    b[(1, 2 * l + 1)] = dn[l][1];
                    b[(2, 2 * l)] = dn[l][1];
                    b[(2, 2 * l + 1)] = dn[l][0];
                }
                k += 0.25 * b.transpose() * &d_mat * &b;
            }
        }
        k
    }

    #[test]
    fn single_q4_matches_voigt_oracle() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 0, 0.25).unwrap();
        let mat = unit_material();
        let k = assemble_stiffness_quadrature(
            &rc,
            &crate::geometry::MacroMapping::identity(2),
            &mat,
            GeometryMode::Isoparametric,
        )
        .unwrap();
        let oracle = q4_voigt_stiffness(1.0, 0.0);
        let diff = (k.to_dense() - &oracle).norm() / oracle.norm();
        assert!(diff <= 1e-13, "relative difference {diff}");
    }

    #[test]
    fn rigid_body_modes_are_annihilated() {
        let rc = build_reference_cell(CellPattern::CrossHollowSquare2d, 1, 0, 0.25).unwrap();
        let mat = Material::new(2, 5000.0, 0.4).unwrap();
        // a curved cell: rigid modes built from mapped node positions
        let patch = crate::geometry::BezierPatch::quarter_annulus(1.0, 2.0);
        let model = crate::geometry::build_macro_model(&patch, [4, 2, 1]).unwrap();
        let mapping = &model.mappings[2];
        let k = assemble_stiffness_quadrature(&rc, mapping, &mat, GeometryMode::Isoparametric)
            .unwrap();
        let knorm = k.frobenius_norm();

        let positions: Vec<[f64; 3]> = rc.nodes.iter().map(|xi| mapping.evaluate(xi).0).collect();
        let mut modes = Vec::new();
        for c in 0..2 {
            let mut u = DVector::zeros(rc.n_dofs());
            for n in 0..rc.n_nodes() {
                u[n * 2 + c] = 1.0;
            }
            modes.push(u);
        }
        let mut rot = DVector::zeros(rc.n_dofs());
        for (n, p) in positions.iter().enumerate() {
            rot[n * 2] = -p[1];
            rot[n * 2 + 1] = p[0];
        }
        modes.push(rot);

        for u in &modes {
            let r = k.matvec(u);
            assert!(
                r.norm() <= 1e-10 * knorm * u.norm().max(1.0),
                "rigid-mode residual {} vs {knorm}",
                r.norm()
            );
        }
    }

    #[test]
    fn zero_loads_give_zero_vector() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 1, 0.25).unwrap();
        let f = assemble_local_rhs(
            &rc,
            &crate::geometry::MacroMapping::identity(2),
            None,
            &[],
        )
        .unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn constant_body_force_sums_to_volume() {
        let rc = build_reference_cell(CellPattern::Solid2d, 2, 1, 0.25).unwrap();
        let f = assemble_local_rhs(
            &rc,
            &crate::geometry::MacroMapping::identity(2),
            Some([3.0, -2.0, 0.0]),
            &[],
        )
        .unwrap();
        let mut sums = [0.0f64; 2];
        for n in 0..rc.n_nodes() {
            sums[0] += f[n * 2];
            sums[1] += f[n * 2 + 1];
        }
        // identity-mapped solid cell has unit volume
        assert_relative_eq!(sums[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(sums[1], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_traction_sums_to_face_measure() {
        let rc = build_reference_cell(CellPattern::Solid2d, 1, 2, 0.25).unwrap();
        let f = assemble_local_rhs(
            &rc,
            &crate::geometry::MacroMapping::affine_box(2, [0.0; 3], [2.0, 3.0, 0.0]),
            None,
            &[TractionSpec {
                axis: 0,
                side: true,
                value: [5.0, 1.0, 0.0],
            }],
        )
        .unwrap();
        let mut sums = [0.0f64; 2];
        for n in 0..rc.n_nodes() {
            sums[0] += f[n * 2];
            sums[1] += f[n * 2 + 1];
        }
        // face x=2 of the 2x3 box has measure 3
        assert_relative_eq!(sums[0], 15.0, epsilon = 1e-12);
        assert_relative_eq!(sums[1], 3.0, epsilon = 1e-12);
    }
}
