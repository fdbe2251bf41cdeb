//! Compressed sparse storage for symmetric matrices.

use nalgebra::{DMatrix, DVector};

/// A symmetric matrix stored as the lower triangle in CSR form.
///
/// Only entries with `col <= row` are stored; every operation expands the
/// symmetry on the fly. Row entries are sorted by column and duplicate
/// coordinates are summed at construction.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates lower-triangle entries before compression.
///
/// Push each unordered index pair once (either orientation); repeated pushes
/// to the same pair are summed.
#[derive(Debug, Clone)]
pub struct SparseSymBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    /// Accumulate `v` at the unordered pair `(i, j)`.
    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> SparseSymMatrix {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_counts = vec![0usize; self.n];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; self.n + 1];
        for i in 0..self.n {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        SparseSymMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseSymMatrix {
    /// Build from lower-triangle triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut b = SparseSymBuilder::new(n);
        for (i, j, v) in triplets {
            b.push(i, j, v);
        }
        b.build()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored (lower-triangle) entries.
    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` (columns `<= i`, sorted).
    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// All stored lower-triangle entries `(row, col, value)`.
    pub fn lower_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x` with symmetric expansion.
    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        self.matvec_add(x, &mut y);
        y
    }

    /// `y += A x`.
    pub fn matvec_add(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let xi = x[i];
            let mut acc = 0.0;
            for p in lo..hi {
                let j = self.col_idx[p];
                let v = self.values[p];
                acc += v * x[j];
                if j != i {
                    y[j] += v * xi;
                }
            }
            y[i] += acc;
        }
    }

    /// `Y = A X` column by column.
    pub fn matmul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.n);
        let mut y = DMatrix::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            let xc = DVector::from_column_slice(x.column(c).as_slice());
            let yc = self.matvec(&xc);
            y.column_mut(c).copy_from(&yc);
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.lower_triplets() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Frobenius norm of the full (symmetric) matrix.
    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for (i, j, v) in self.lower_triplets() {
            acc += if i == j { v * v } else { 2.0 * v * v };
        }
        acc.sqrt()
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    /// Principal submatrix over `keep`, renumbered by `new_index`
    /// (`new_index[old] = Some(new)` for kept indices).
    pub fn submatrix(&self, new_index: &[Option<usize>], new_dim: usize) -> SparseSymMatrix {
        let mut b = SparseSymBuilder::with_capacity(new_dim, self.nnz_lower());
        for (i, j, v) in self.lower_triplets() {
            if let (Some(ni), Some(nj)) = (new_index[i], new_index[j]) {
                b.push(ni, nj, v);
            }
        }
        b.build()
    }

    /// Dense rectangular block `A[rows, cols]` with symmetric expansion.
    ///
    /// `row_index`/`col_index` map old indices into the block (disjoint sets
    /// are expected; a diagonal entry mapped by both is written to both).
    pub fn rect_block(
        &self,
        row_index: &[Option<usize>],
        n_rows: usize,
        col_index: &[Option<usize>],
        n_cols: usize,
    ) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n_rows, n_cols);
        for (i, j, v) in self.lower_triplets() {
            if let (Some(r), Some(c)) = (row_index[i], col_index[j]) {
                m[(r, c)] += v;
            }
            if i != j {
                if let (Some(r), Some(c)) = (row_index[j], col_index[i]) {
                    m[(r, c)] += v;
                }
            }
        }
        m
    }

    /// Estimated heap size of the stored triangle, in bytes.
    pub fn storage_bytes(&self) -> usize {
        self.col_idx.len() * std::mem::size_of::<usize>()
            + self.values.len() * std::mem::size_of::<f64>()
            + self.row_ptr.len() * std::mem::size_of::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builder_sums_duplicates_and_sorts() {
        let a = SparseSymMatrix::from_triplets(
            3,
            vec![(0, 0, 1.0), (2, 1, 0.5), (1, 2, 0.5), (2, 2, 3.0), (0, 0, 1.0)],
        );
        let d = a.to_dense();
        assert_eq!(d[(0, 0)], 2.0);
        assert_eq!(d[(1, 2)], 1.0);
        assert_eq!(d[(2, 1)], 1.0);
        assert_eq!(d[(2, 2)], 3.0);
        assert_eq!(a.nnz_lower(), 3);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = SparseSymMatrix::from_triplets(
            4,
            vec![
                (0, 0, 4.0),
                (1, 0, 1.0),
                (1, 1, 5.0),
                (2, 2, 6.0),
                (3, 1, -2.0),
                (3, 3, 7.0),
            ],
        );
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let y = a.matvec(&x);
        let yd = a.to_dense() * &x;
        assert_relative_eq!(y, yd, epsilon = 1e-14);
    }

    #[test]
    fn blocks_and_submatrices() {
        let a = SparseSymMatrix::from_triplets(
            4,
            vec![
                (0, 0, 4.0),
                (1, 0, 1.0),
                (1, 1, 5.0),
                (2, 0, 2.0),
                (2, 2, 6.0),
                (3, 2, -2.0),
                (3, 3, 7.0),
            ],
        );
        // keep {1, 3} -> new {0, 1}
        let idx = vec![None, Some(0), None, Some(1)];
        let sub = a.submatrix(&idx, 2);
        let d = sub.to_dense();
        assert_eq!(d[(0, 0)], 5.0);
        assert_eq!(d[(1, 1)], 7.0);
        assert_eq!(d[(0, 1)], 0.0);

        // rectangular block rows {0,1} cols {2,3}
        let ri = vec![Some(0), Some(1), None, None];
        let ci = vec![None, None, Some(0), Some(1)];
        let blk = a.rect_block(&ri, 2, &ci, 2);
        assert_eq!(blk[(0, 0)], 2.0); // A[0,2]
        assert_eq!(blk[(1, 1)], 0.0);
        assert_eq!(blk[(1, 0)], 0.0);
    }

    #[test]
    fn frobenius_counts_off_diagonals_twice() {
        let a = SparseSymMatrix::from_triplets(2, vec![(0, 0, 3.0), (1, 0, 4.0)]);
        assert_relative_eq!(a.frobenius_norm(), (9.0f64 + 32.0).sqrt(), epsilon = 1e-15);
    }
}
