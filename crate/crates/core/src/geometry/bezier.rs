//! Rational tensor-product Bezier mappings.
//!
//! Control points are kept in homogeneous form `(w x, w y, w z, w)` so that
//! evaluation, derivatives (quotient rule) and interval restriction
//! (blossoming) are exact for rational mappings such as circular arcs.

use crate::error::Error;

/// One cell's geometric mapping `[0,1]^d -> R^d`.
#[derive(Debug, Clone)]
pub struct MacroMapping {
    dim: usize,
    degrees: [usize; 3],
    ctrl: Vec<[f64; 4]>,
}

fn bernstein(p: usize, t: f64, values: &mut [f64], derivs: &mut [f64]) {
    match p {
        0 => {
            values[0] = 1.0;
            derivs[0] = 0.0;
        }
        1 => {
            values[0] = 1.0 - t;
            values[1] = t;
            derivs[0] = -1.0;
            derivs[1] = 1.0;
        }
        2 => {
            let u = 1.0 - t;
            values[0] = u * u;
            values[1] = 2.0 * t * u;
            values[2] = t * t;
            derivs[0] = -2.0 * u;
            derivs[1] = 2.0 - 4.0 * t;
            derivs[2] = 2.0 * t;
        }
        _ => {
            // general de Casteljau-free evaluation; degrees above 2 are not
            // constructed by this crate but keep the kernel generic
            for (i, v) in values.iter_mut().enumerate().take(p + 1) {
                *v = binomial(p, i) as f64 * t.powi(i as i32) * (1.0 - t).powi((p - i) as i32);
            }
            for i in 0..=p {
                let a = if i > 0 {
                    binomial(p - 1, i - 1) as f64
                        * t.powi((i - 1) as i32)
                        * (1.0 - t).powi((p - i) as i32)
                } else {
                    0.0
                };
                let b = if i < p {
                    binomial(p - 1, i) as f64
                        * t.powi(i as i32)
                        * (1.0 - t).powi((p - 1 - i) as i32)
                } else {
                    0.0
                };
                derivs[i] = p as f64 * (a - b);
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

impl MacroMapping {
    /// Build from homogeneous control points, lexicographic with the first
    /// parametric direction fastest.
    pub fn from_homogeneous(dim: usize, degrees: [usize; 3], ctrl: Vec<[f64; 4]>) -> Self {
        let expected: usize = (0..dim).map(|a| degrees[a] + 1).product();
        assert_eq!(ctrl.len(), expected, "control net size mismatch");
        assert!(ctrl.iter().all(|c| c[3] > 0.0), "weights must be positive");
        Self { dim, degrees, ctrl }
    }

    /// Axis-aligned affine box mapping (degree 1, unit weights).
    pub fn affine_box(dim: usize, lo: [f64; 3], hi: [f64; 3]) -> Self {
        let mut degrees = [0usize; 3];
        for a in degrees.iter_mut().take(dim) {
            *a = 1;
        }
        let counts: Vec<usize> = (0..dim).map(|_| 2).collect();
        let n: usize = counts.iter().product();
        let mut ctrl = Vec::with_capacity(n);
        for idx in 0..n {
            let mut rem = idx;
            let mut p = [0.0f64; 4];
            p[3] = 1.0;
            for a in 0..dim {
                let bit = rem % 2;
                rem /= 2;
                p[a] = if bit == 0 { lo[a] } else { hi[a] };
            }
            ctrl.push(p);
        }
        Self::from_homogeneous(dim, degrees, ctrl)
    }

    pub fn identity(dim: usize) -> Self {
        Self::affine_box(dim, [0.0; 3], [1.0, 1.0, 1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degrees(&self) -> [usize; 3] {
        self.degrees
    }

    /// Homogeneous control points (lexicographic, first direction fastest).
    pub fn control_points(&self) -> &[[f64; 4]] {
        &self.ctrl
    }

    /// Evaluate position and Jacobian at a parametric point.
    ///
    /// The Jacobian is returned as a 3x3 array with `j[i][a] = dx_i/dxi_a`;
    /// unused dimensions carry an identity block so the determinant of the
    /// full array equals the d-dimensional one.
    pub fn evaluate(&self, xi: &[f64]) -> ([f64; 3], [[f64; 3]; 3]) {
        let d = self.dim;
        debug_assert!(xi.len() >= d);
        let mut vals = [[0.0f64; 3]; 3];
        let mut ders = [[0.0f64; 3]; 3];
        let mut counts = [1usize; 3];
        for a in 0..d {
            let p = self.degrees[a];
            counts[a] = p + 1;
            bernstein(p, xi[a], &mut vals[a][..p + 1], &mut ders[a][..p + 1]);
        }

        // homogeneous value and per-direction homogeneous derivatives
        let mut s = [0.0f64; 4];
        let mut sd = [[0.0f64; 4]; 3];
        for i2 in 0..counts[2] {
            for i1 in 0..counts[1] {
                for i0 in 0..counts[0] {
                    let idx = (i2 * counts[1] + i1) * counts[0] + i0;
                    let c = &self.ctrl[idx];
                    let b0 = if d > 0 { vals[0][i0] } else { 1.0 };
                    let b1 = if d > 1 { vals[1][i1] } else { 1.0 };
                    let b2 = if d > 2 { vals[2][i2] } else { 1.0 };
                    let w = b0 * b1 * b2;
                    for k in 0..4 {
                        s[k] += w * c[k];
                    }
                    for a in 0..d {
                        let da = match a {
                            0 => ders[0][i0] * b1 * b2,
                            1 => b0 * ders[1][i1] * b2,
                            _ => b0 * b1 * ders[2][i2],
                        };
                        for k in 0..4 {
                            sd[a][k] += da * c[k];
                        }
                    }
                }
            }
        }

        let w = s[3];
        let mut x = [0.0f64; 3];
        for (i, xi_out) in x.iter_mut().enumerate() {
            *xi_out = s[i] / w;
        }
        let mut j = [[0.0f64; 3]; 3];
        for a in 0..d {
            let wa = sd[a][3];
            for i in 0..3 {
                j[i][a] = (sd[a][i] * w - s[i] * wa) / (w * w);
            }
        }
        // pad unused parametric directions so det3 reduces to the d-dim one
        for a in d..3 {
            j[a][a] = 1.0;
        }
        (x, j)
    }

    /// Restrict the mapping to the parametric box `[lo, hi]` (blossoming on
    /// homogeneous coordinates; exact for rational mappings).
    pub fn restricted(&self, lo: [f64; 3], hi: [f64; 3]) -> Self {
        let d = self.dim;
        let mut ctrl = self.ctrl.clone();
        let mut counts = [1usize; 3];
        for a in 0..d {
            counts[a] = self.degrees[a] + 1;
        }
        for a in 0..d {
            restrict_direction(&mut ctrl, counts, a, self.degrees[a], lo[a], hi[a]);
        }
        Self {
            dim: d,
            degrees: self.degrees,
            ctrl,
        }
    }

    /// Verify `det J > 0` on a `(p+2)^d` sample grid.
    pub fn check_jacobian(&self) -> Result<(), Error> {
        let d = self.dim;
        let samples: Vec<usize> = (0..d).map(|a| self.degrees[a] + 2).collect();
        let total: usize = samples.iter().product();
        for idx in 0..total {
            let mut rem = idx;
            let mut xi = [0.0f64; 3];
            for a in 0..d {
                let m = samples[a];
                xi[a] = (rem % m) as f64 / (m - 1) as f64;
                rem /= m;
            }
            let (_, j) = self.evaluate(&xi);
            let det = det3(&j);
            if det <= 0.0 {
                return Err(Error::DegenerateJacobian { det, at: xi });
            }
        }
        Ok(())
    }
}

/// Determinant of the padded 3x3 Jacobian.
pub(crate) fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

/// Inverse of the padded 3x3 Jacobian.
pub(crate) fn inv3(j: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = det3(j);
    let mut m = [[0.0f64; 3]; 3];
    m[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det;
    m[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det;
    m[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det;
    m[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det;
    m[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det;
    m[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det;
    m[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det;
    m[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det;
    m[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det;
    m
}

/// De Casteljau polar form along one tensor direction.
fn restrict_direction(
    ctrl: &mut Vec<[f64; 4]>,
    counts: [usize; 3],
    axis: usize,
    degree: usize,
    lo: f64,
    hi: f64,
) {
    let stride = match axis {
        0 => 1,
        1 => counts[0],
        _ => counts[0] * counts[1],
    };
    let m = counts[axis];
    // iterate over all lines along `axis`
    let mut line = vec![[0.0f64; 4]; m];
    let total: usize = counts.iter().product();
    let mut bases = Vec::new();
    for idx in 0..total {
        // base index of the line containing idx (component along axis zeroed)
        let along = (idx / stride) % m;
        if along == 0 {
            bases.push(idx);
        }
    }
    for &base in &bases {
        for k in 0..m {
            line[k] = ctrl[base + k * stride];
        }
        let new_line = blossom_restrict(&line, degree, lo, hi);
        for k in 0..m {
            ctrl[base + k * stride] = new_line[k];
        }
    }
}

fn blossom_restrict(points: &[[f64; 4]], degree: usize, lo: f64, hi: f64) -> Vec<[f64; 4]> {
    (0..=degree)
        .map(|k| {
            // polar form with (degree-k) args at lo and k args at hi
            let mut work: Vec<[f64; 4]> = points.to_vec();
            for step in 0..degree {
                let t = if step < degree - k { lo } else { hi };
                for i in 0..(work.len() - 1) {
                    for c in 0..4 {
                        work[i][c] = (1.0 - t) * work[i][c] + t * work[i + 1][c];
                    }
                }
                work.pop();
            }
            work[0]
        })
        .collect()
}
