//! Isotropic linear-elastic material and the gradient-space packing of its
//! elasticity tensor.

use nalgebra::DMatrix;

use crate::error::Error;

/// Isotropic material; plane strain in 2D, full isotropic in 3D.
#[derive(Debug, Clone)]
pub struct Material {
    /// Young's modulus (MPa).
    pub youngs_modulus: f64,
    /// Poisson ratio.
    pub poisson_ratio: f64,
    dim: usize,
    /// Elasticity tensor as a symmetric operator on displacement gradients:
    /// `cmat[(i*d + j, k*d + l)] = C_ijkl`.
    cmat: DMatrix<f64>,
}

impl Material {
    pub fn new(dim: usize, youngs_modulus: f64, poisson_ratio: f64) -> Result<Self, Error> {
        if youngs_modulus <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "Young's modulus must be positive, got {youngs_modulus}"
            )));
        }
        if !(-1.0 < poisson_ratio && poisson_ratio < 0.5) {
            return Err(Error::InvalidInput(format!(
                "Poisson ratio must lie in (-1, 0.5), got {poisson_ratio}"
            )));
        }
        let lambda =
            youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
        let mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio));
        let d2 = dim * dim;
        let mut cmat = DMatrix::zeros(d2, d2);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        cmat[(i * dim + j, k * dim + l)] = lambda * delta(i, j) * delta(k, l)
                            + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                    }
                }
            }
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
            dim,
            cmat,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lame_lambda(&self) -> f64 {
        self.youngs_modulus * self.poisson_ratio
            / ((1.0 + self.poisson_ratio) * (1.0 - 2.0 * self.poisson_ratio))
    }

    pub fn lame_mu(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// `C_ijkl` in gradient-pair layout.
    pub fn grad_operator(&self) -> &DMatrix<f64> {
        &self.cmat
    }
}

/// Number of independent components of a symmetric operator on gradients.
pub fn grad_pair_count(dim: usize) -> usize {
    let d2 = dim * dim;
    d2 * (d2 + 1) / 2
}

/// Packed index of the symmetric `(d^2)x(d^2)` matrix entry `(r, c)`.
#[inline]
pub fn pack_index(d2: usize, r: usize, c: usize) -> usize {
    let (r, c) = if r <= c { (r, c) } else { (c, r) };
    r * (2 * d2 - r + 1) / 2 + (c - r)
}
