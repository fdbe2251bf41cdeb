//! Pullback of the elasticity tensor through a macro mapping, and its
//! per-cell polynomial interpolation.

use crate::error::Error;
use crate::geometry::MacroMapping;

use super::material::{grad_pair_count, pack_index, Material};
use super::quadrature::{chebyshev_gauss_lobatto, lagrange_basis};

/// Per-cell polynomial coefficients of the pulled-back tensor field.
///
/// `values[q * n_c + c]` is the packed tensor component `c` at interpolation
/// node `q` (tensor-product Chebyshev-Gauss-Lobatto nodes, so coefficients
/// are nodal values).
#[derive(Debug, Clone)]
pub struct PolyCoeffs {
    pub cell: usize,
    pub fit_degree: usize,
    pub n_basis: usize,
    pub n_components: usize,
    pub values: Vec<f64>,
}

impl PolyCoeffs {
    pub fn flat(&self) -> &[f64] {
        &self.values
    }

    /// Evaluate the fitted field at `xi`, returning packed components.
    pub fn evaluate(&self, dim: usize, xi: &[f64]) -> Vec<f64> {
        let nodes = chebyshev_gauss_lobatto(self.fit_degree);
        let per_axis: Vec<(Vec<f64>, Vec<f64>)> =
            (0..dim).map(|a| lagrange_basis(&nodes, xi[a])).collect();
        let m = nodes.len();
        let mut out = vec![0.0; self.n_components];
        for q in 0..self.n_basis {
            let mut rem = q;
            let mut weight = 1.0;
            for axis_vals in per_axis.iter().take(dim) {
                weight *= axis_vals.0[rem % m];
                rem /= m;
            }
            for c in 0..self.n_components {
                out[c] += weight * self.values[q * self.n_components + c];
            }
        }
        out
    }
}

/// Packed pulled-back tensor at one parametric point:
/// `det(J) * C_ijkl * Jinv[a][j] * Jinv[b][l]` in gradient-pair packing.
pub fn pulled_back_field(
    mapping: &MacroMapping,
    material: &Material,
    xi: &[f64],
) -> Result<Vec<f64>, Error> {
    let d = mapping.dim();
    let (_, j) = mapping.evaluate(xi);
    let det = crate::geometry::det3_of(&j);
    if det <= 0.0 {
        return Err(Error::DegenerateJacobian {
            det,
            at: [xi[0], xi.get(1).copied().unwrap_or(0.0), xi.get(2).copied().unwrap_or(0.0)],
        });
    }
    let jinv = crate::geometry::inv3_of(&j);
    let c = material.grad_operator();
    let d2 = d * d;
    let n_c = grad_pair_count(d);
    let mut packed = vec![0.0; n_c];
    for r in 0..d2 {
        let (i, a) = (r / d, r % d);
        for col in r..d2 {
            let (k, b) = (col / d, col % d);
            let mut acc = 0.0;
            for jj in 0..d {
                for ll in 0..d {
                    acc += c[(i * d + jj, k * d + ll)] * jinv[a][jj] * jinv[b][ll];
                }
            }
            packed[pack_index(d2, r, col)] = det * acc;
        }
    }
    Ok(packed)
}

/// Interpolate the pulled-back field by tensor-product Lagrange polynomials
/// of `fit_degree` per direction at Chebyshev-Gauss-Lobatto nodes.
///
/// For affine mappings the field is constant and the interpolation is exact
/// for any degree.
pub fn fit_poly_coeffs(
    cell: usize,
    mapping: &MacroMapping,
    material: &Material,
    fit_degree: usize,
) -> Result<PolyCoeffs, Error> {
    let d = mapping.dim();
    let nodes = chebyshev_gauss_lobatto(fit_degree);
    let m = nodes.len();
    let n_basis = m.pow(d as u32);
    let n_components = grad_pair_count(d);
    let mut values = vec![0.0; n_basis * n_components];
    for q in 0..n_basis {
        let mut rem = q;
        let mut xi = [0.0f64; 3];
        for axis_xi in xi.iter_mut().take(d) {
            *axis_xi = nodes[rem % m];
            rem /= m;
        }
        let packed = pulled_back_field(mapping, material, &xi[..d])?;
        values[q * n_components..(q + 1) * n_components].copy_from_slice(&packed);
    }
    Ok(PolyCoeffs {
        cell,
        fit_degree,
        n_basis,
        n_components,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_mapping_gives_constant_material_tensor() {
        let mat = Material::new(2, 5000.0, 0.4).unwrap();
        let m = MacroMapping::identity(2);
        let coeffs = fit_poly_coeffs(0, &m, &mat, 2).unwrap();
        let c = mat.grad_operator();
        let d2 = 4;
        for q in 0..coeffs.n_basis {
            for r in 0..d2 {
                for col in r..d2 {
                    let packed = coeffs.values[q * coeffs.n_components + pack_index(d2, r, col)];
                    assert_relative_eq!(packed, c[(r, col)], epsilon = 1e-12);
                }
            }
        }
    }

    /// Uniform 2D scaling cancels exactly: det J = h^2 and each J^{-1}
    /// contributes 1/h.
    #[test]
    fn uniform_scaling_cancels_in_2d() {
        let mat = Material::new(2, 5000.0, 0.4).unwrap();
        let h = 0.37;
        let m = MacroMapping::affine_box(2, [1.0, 2.0, 0.0], [1.0 + h, 2.0 + h, 0.0]);
        let packed = pulled_back_field(&m, &mat, &[0.3, 0.8]).unwrap();
        let c = mat.grad_operator();
        let d2 = 4;
        for r in 0..d2 {
            for col in r..d2 {
                assert_relative_eq!(
                    packed[pack_index(d2, r, col)],
                    c[(r, col)],
                    epsilon = 1e-12 * c[(0, 0)].abs()
                );
            }
        }
    }

    #[test]
    fn annulus_fit_residual_is_small_and_decreases_with_degree() {
        let mat = Material::new(2, 5000.0, 0.4).unwrap();
        let patch = crate::geometry::BezierPatch::quarter_annulus(1.0, 2.0);
        let model = crate::geometry::build_macro_model(&patch, [4, 2, 1]).unwrap();
        let mapping = &model.mappings[0];

        let field_norm = |xi: &[f64]| {
            let f = pulled_back_field(mapping, &mat, xi).unwrap();
            f.iter().map(|v| v * v).sum::<f64>().sqrt()
        };

        let mut errors = Vec::new();
        for q in [2usize, 3, 4] {
            let coeffs = fit_poly_coeffs(0, mapping, &mat, q).unwrap();
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..7 {
                for j in 0..7 {
                    let xi = [0.07 + 0.13 * i as f64, 0.03 + 0.14 * j as f64];
                    let exact = pulled_back_field(mapping, &mat, &xi).unwrap();
                    let fitted = coeffs.evaluate(2, &xi);
                    let err: f64 = exact
                        .iter()
                        .zip(fitted.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    worst = worst.max(err);
                    scale = scale.max(field_norm(&xi));
                }
            }
            errors.push(worst / scale);
        }
        assert!(errors[0] <= 0.05, "q=2 relative residual {}", errors[0]);
        assert!(errors[1] < errors[0]);
        assert!(errors[2] < errors[1]);
    }
}
