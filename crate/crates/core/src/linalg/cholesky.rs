//! Cholesky factorization: sparse up-looking with RCM ordering, dense below
//! [`DENSE_FACTOR_LIMIT`].

use nalgebra::{DMatrix, DVector};

use super::{reverse_cuthill_mckee, SparseSymMatrix};
use crate::error::Error;

/// Matrices below this dimension are factorized densely.
pub const DENSE_FACTOR_LIMIT: usize = 64;

/// A Cholesky factorization `P A P^T = L L^T`.
///
/// The permutation is the identity for the dense variant. `solve` applies
/// one forward and one backward substitution.
#[derive(Debug, Clone)]
pub enum CholeskyFactor {
    Dense {
        lower: DMatrix<f64>,
    },
    Sparse {
        /// `order[new] = old`
        order: Vec<usize>,
        /// `inverse[old] = new`
        inverse: Vec<usize>,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

/// Dense lower Cholesky factor of a symmetric positive definite matrix.
pub fn dense_cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Factorize a symmetric positive definite matrix.
///
/// Small matrices go through the dense kernel; larger ones use an up-looking
/// sparse factorization of the RCM-permuted matrix. Both honor the same
/// solve contract, and the factorization is deterministic.
pub fn cholesky(a: &SparseSymMatrix) -> Result<CholeskyFactor, Error> {
    let n = a.dim();
    if n < DENSE_FACTOR_LIMIT {
        let lower = dense_cholesky_lower(&a.to_dense())?;
        return Ok(CholeskyFactor::Dense { lower });
    }

    let order = reverse_cuthill_mckee(a);
    let mut inverse = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        inverse[old] = new;
    }

    // permuted lower-triangle CSR (rows sorted)
    let mut triples: Vec<(usize, usize, f64)> = a
        .lower_triplets()
        .map(|(i, j, v)| {
            let (pi, pj) = (inverse[i], inverse[j]);
            if pi >= pj {
                (pi, pj, v)
            } else {
                (pj, pi, v)
            }
        })
        .collect();
    triples.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let mut row_ptr = vec![0usize; n + 1];
    for &(r, _, _) in &triples {
        row_ptr[r + 1] += 1;
    }
    for i in 0..n {
        row_ptr[i + 1] += row_ptr[i];
    }

    // elimination tree over the permuted pattern
    let none = usize::MAX;
    let mut parent = vec![none; n];
    let mut ancestor = vec![none; n];
    for k in 0..n {
        for p in row_ptr[k]..row_ptr[k + 1] {
            let mut i = triples[p].1;
            while i != none && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == none {
                    parent[i] = k;
                    break;
                }
                i = next;
            }
        }
    }

    // up-looking numeric factorization
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut diag = vec![0.0f64; n];
    let mut x = vec![0.0f64; n];
    let mut mark = vec![usize::MAX; n];
    let mut stack = vec![0usize; n];
    let mut path = vec![0usize; n];

    for k in 0..n {
        // ereach: pattern of row k in topological order
        let mut top = n;
        mark[k] = k;
        for p in row_ptr[k]..row_ptr[k + 1] {
            let (_, j, v) = triples[p];
            x[j] = v;
            let mut i = j;
            let mut len = 0;
            while mark[i] != k {
                path[len] = i;
                len += 1;
                mark[i] = k;
                i = parent[i];
                if i == none {
                    break;
                }
            }
            while len > 0 {
                len -= 1;
                top -= 1;
                stack[top] = path[len];
            }
        }

        let mut d = x[k];
        x[k] = 0.0;
        for &j in &stack[top..n] {
            let lkj = x[j] / diag[j];
            x[j] = 0.0;
            for &(i, lij) in &cols[j] {
                x[i] -= lij * lkj;
            }
            d -= lkj * lkj;
            cols[j].push((k, lkj));
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: order[k],
                pivot: d,
            });
        }
        diag[k] = d.sqrt();
    }

    let mut col_ptr = vec![0usize; n + 1];
    for j in 0..n {
        col_ptr[j + 1] = col_ptr[j] + cols[j].len() + 1;
    }
    let nnz = col_ptr[n];
    let mut row_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for j in 0..n {
        row_idx.push(j);
        values.push(diag[j]);
        for &(i, v) in &cols[j] {
            row_idx.push(i);
            values.push(v);
        }
    }

    Ok(CholeskyFactor::Sparse {
        order,
        inverse,
        col_ptr,
        row_idx,
        values,
    })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        match self {
            CholeskyFactor::Dense { lower } => lower.nrows(),
            CholeskyFactor::Sparse { order, .. } => order.len(),
        }
    }

    /// Solve `A x = b` by forward/backward substitution.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            CholeskyFactor::Dense { lower } => {
                let mut x = b.clone();
                let n = lower.nrows();
                for j in 0..n {
                    x[j] /= lower[(j, j)];
                    let xj = x[j];
                    for i in (j + 1)..n {
                        x[i] -= lower[(i, j)] * xj;
                    }
                }
                for j in (0..n).rev() {
                    let mut s = x[j];
                    for i in (j + 1)..n {
                        s -= lower[(i, j)] * x[i];
                    }
                    x[j] = s / lower[(j, j)];
                }
                x
            }
            CholeskyFactor::Sparse {
                order,
                inverse: _,
                col_ptr,
                row_idx,
                values,
            } => {
                let n = order.len();
                let mut x = DVector::zeros(n);
                for new in 0..n {
                    x[new] = b[order[new]];
                }
                for j in 0..n {
                    let lo = col_ptr[j];
                    let hi = col_ptr[j + 1];
                    x[j] /= values[lo];
                    let xj = x[j];
                    for p in (lo + 1)..hi {
                        x[row_idx[p]] -= values[p] * xj;
                    }
                }
                for j in (0..n).rev() {
                    let lo = col_ptr[j];
                    let hi = col_ptr[j + 1];
                    let mut s = x[j];
                    for p in (lo + 1)..hi {
                        s -= values[p] * x[row_idx[p]];
                    }
                    x[j] = s / values[lo];
                }
                let mut out = DVector::zeros(n);
                for new in 0..n {
                    out[order[new]] = x[new];
                }
                out
            }
        }
    }

    /// Solve for every column of `b`.
    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            let col = DVector::from_column_slice(b.column(c).as_slice());
            out.column_mut(c).copy_from(&self.solve(&col));
        }
        out
    }

    /// Reconstruct the factored matrix densely (for verification).
    pub fn reconstruct_dense(&self) -> DMatrix<f64> {
        match self {
            CholeskyFactor::Dense { lower } => lower * lower.transpose(),
            CholeskyFactor::Sparse {
                order,
                col_ptr,
                row_idx,
                values,
                ..
            } => {
                let n = order.len();
                let mut l = DMatrix::zeros(n, n);
                for j in 0..n {
                    for p in col_ptr[j]..col_ptr[j + 1] {
                        l[(row_idx[p], j)] = values[p];
                    }
                }
                let llt = &l * l.transpose();
                let mut a = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        a[(order[i], order[j])] = llt[(i, j)];
                    }
                }
                a
            }
        }
    }

    /// Number of stored factor entries.
    pub fn factor_nnz(&self) -> usize {
        match self {
            CholeskyFactor::Dense { lower } => {
                let n = lower.nrows();
                n * (n + 1) / 2
            }
            CholeskyFactor::Sparse { values, .. } => values.len(),
        }
    }

    /// Estimated heap footprint of the factor, in bytes.
    pub fn storage_bytes(&self) -> usize {
        match self {
            CholeskyFactor::Dense { lower } => lower.len() * std::mem::size_of::<f64>(),
            CholeskyFactor::Sparse {
                order,
                inverse,
                col_ptr,
                row_idx,
                values,
            } => {
                (order.len() + inverse.len() + col_ptr.len() + row_idx.len())
                    * std::mem::size_of::<usize>()
                    + values.len() * std::mem::size_of::<f64>()
            }
        }
    }
}
