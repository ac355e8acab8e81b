//! Sparse matrices: triplet assembly and a compressed-row query/multiply form.

use crate::scalar::Real;

/// Triplet (COO) accumulator used during operator assembly.
#[derive(Clone, Debug)]
pub struct CooMatrix<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> CooMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        assert!(row < self.nrows && col < self.ncols, "triplet ({row},{col}) out of bounds");
        self.entries.push((row, col, value));
    }

    /// Finalize into compressed row form. Duplicate entries are summed in
    /// insertion order; column indices come out sorted per row.
    pub fn to_csr(mut self) -> SparseMatrix<T> {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut last = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
            row_ptr[r + 1] = col_idx.len();
        }
        // rows without entries inherit the running offset
        for r in 1..=self.nrows {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

/// Sparse matrix in compressed row form. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices and values of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => T::zero(),
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "spmv dimension mismatch");
        let mut y = vec![T::zero(); self.nrows];
        for i in 0..self.nrows {
            let mut acc = T::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// `y = Aᵀ x` without materializing the transpose.
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows, "transposed spmv dimension mismatch");
        let mut y = vec![T::zero(); self.ncols];
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        let mut acc = T::zero();
        for i in 0..self.nrows {
            let mut row_acc = T::zero();
            for (j, v) in self.row(i) {
                row_acc += v * y[j];
            }
            acc += x[i] * row_acc;
        }
        acc
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        let mut next = counts.clone();
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let dst = next[j];
                col_idx[dst] = i;
                values[dst] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product `A B` with deterministic accumulation order.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut acc = vec![T::zero(); other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut coo = CooMatrix::with_capacity(self.nrows, other.ncols, self.nnz());
        for i in 0..self.nrows {
            for (k, aik) in self.row(i) {
                for (j, bkj) in other.row(k) {
                    if acc[j] == T::zero() && !touched.contains(&j) {
                        touched.push(j);
                    }
                    acc[j] += aik * bkj;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                coo.push(i, j, acc[j]);
                acc[j] = T::zero();
            }
            touched.clear();
        }
        coo.to_csr()
    }

    /// Scales row `i` by `w[i]`.
    pub fn scale_rows(&self, w: &[T]) -> Self {
        assert_eq!(w.len(), self.nrows);
        let mut out = self.clone();
        for i in 0..self.nrows {
            for pos in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[pos] = self.values[pos] * w[i];
            }
        }
        out
    }

    /// `alpha·A + beta·B` entrywise; the result of combining two exactly
    /// symmetric matrices stays exactly symmetric.
    pub fn add_scaled(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "add dimension mismatch");
        let mut coo = CooMatrix::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ja, va)), Some((jb, vb))) => {
                        if ja == jb {
                            coo.push(i, ja, alpha * va + beta * vb);
                            a.next();
                            b.next();
                        } else if ja < jb {
                            coo.push(i, ja, alpha * va);
                            a.next();
                        } else {
                            coo.push(i, jb, beta * vb);
                            b.next();
                        }
                    }
                    (Some((ja, va)), None) => {
                        coo.push(i, ja, alpha * va);
                        a.next();
                    }
                    (None, Some((jb, vb))) => {
                        coo.push(i, jb, beta * vb);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
        }
        coo.to_csr()
    }

    /// Normal product `AᵀWA` for diagonal `W`. The upper triangle is computed
    /// once and mirrored, so the result is symmetric with `max|Q−Qᵀ| = 0`.
    pub fn normal_product(&self, w: &[T]) -> Self {
        assert_eq!(w.len(), self.nrows, "weight length mismatch");
        let at = self.transpose();
        let n = self.ncols;
        let mut acc = vec![T::zero(); n];
        let mut touched: Vec<usize> = Vec::new();
        let mut coo = CooMatrix::with_capacity(n, n, 4 * self.nnz());
        for i in 0..n {
            for (k, aki) in at.row(i) {
                let s = w[k] * aki;
                for (j, akj) in self.row(k) {
                    if j < i {
                        continue;
                    }
                    if acc[j] == T::zero() && !touched.contains(&j) {
                        touched.push(j);
                    }
                    acc[j] += s * akj;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                coo.push(i, j, acc[j]);
                if j != i {
                    coo.push(j, i, acc[j]);
                }
                acc[j] = T::zero();
            }
            touched.clear();
        }
        coo.to_csr()
    }

    /// Row submatrix in the order given by `rows`.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut coo = CooMatrix::new(rows.len(), self.ncols);
        for (new_i, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                coo.push(new_i, j, v);
            }
        }
        coo.to_csr()
    }

    /// Submatrix with remapped columns; `col_map[j] = Some(new_j)` keeps a
    /// column, `None` drops it.
    pub fn select_columns(&self, col_map: &[Option<usize>], new_ncols: usize) -> Self {
        let mut coo = CooMatrix::new(self.nrows, new_ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                if let Some(nj) = col_map[j] {
                    coo.push(i, nj, v);
                }
            }
        }
        coo.to_csr()
    }

    pub fn diagonal(&self) -> Vec<T> {
        let n = self.nrows.min(self.ncols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    /// True when every stored entry lies on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        (0..self.nrows).all(|i| self.row(i).all(|(j, _)| j == i))
    }

    /// Maximum absolute row sum.
    pub fn infinity_norm(&self) -> T {
        let mut norm = T::zero();
        for i in 0..self.nrows {
            let mut s = T::zero();
            for (_, v) in self.row(i) {
                s += v.abs();
            }
            norm = norm.max(s);
        }
        norm
    }

    /// `max |A_ij − A_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> T {
        assert_eq!(self.nrows, self.ncols);
        let mut worst = T::zero();
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// MatrixMarket coordinate export (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        out.push_str(&format!("{} {} {}\n", self.nrows, self.ncols, self.nnz()));
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
            }
        }
        out
    }

    /// Dense copy, for small oracle comparisons.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out[i][j] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix<f64> {
        let mut coo = CooMatrix::new(2, 3);
        coo.push(0, 0, 1.0);
        coo.push(0, 2, 2.0);
        coo.push(1, 1, 3.0);
        coo.push(0, 2, 0.5); // duplicate, summed
        coo.to_csr()
    }

    #[test]
    fn identity_times_x_is_x() {
        let id = SparseMatrix::<f64>::identity(4);
        let x = vec![1.0, -2.0, 3.5, 0.0];
        assert_eq!(id.mul_vec(&x), x);
    }

    #[test]
    fn zero_matrix_times_x_is_zero() {
        let z = SparseMatrix::<f64>::zeros(3, 4);
        assert_eq!(z.mul_vec(&[1.0, 2.0, 3.0, 4.0]), vec![0.0; 3]);
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = small();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 2), 2.5);
        let cols: Vec<usize> = a.row(0).map(|(j, _)| j).collect();
        assert_eq!(cols, vec![0, 2]);
    }

    #[test]
    fn transpose_round_trip() {
        let a = small();
        let att = a.transpose().transpose();
        assert_eq!(a, att);
    }

    #[test]
    fn matmul_against_hand_computation() {
        let a = small(); // [[1,0,2.5],[0,3,0]]
        let b = {
            let mut coo = CooMatrix::new(3, 2);
            coo.push(0, 0, 1.0);
            coo.push(1, 0, -1.0);
            coo.push(2, 1, 4.0);
            coo.to_csr()
        };
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(0, 1), 10.0);
        assert_eq!(c.get(1, 0), -3.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn normal_product_is_exactly_symmetric() {
        // awkward scales to provoke rounding: symmetry must still be exact
        let mut coo = CooMatrix::<f64>::new(3, 4);
        coo.push(0, 0, 1.0e-7);
        coo.push(0, 1, 3.1);
        coo.push(1, 1, -2.7e5);
        coo.push(1, 2, 0.3);
        coo.push(2, 0, 9.9);
        coo.push(2, 3, -1.0 / 3.0);
        let a = coo.to_csr();
        let q = a.normal_product(&[0.1, 2.0e-3, 7.7]);
        assert_eq!(q.max_asymmetry(), 0.0);
        // spot value: q[0][0] = Σ w_k a_k0²
        let expected = 0.1 * 1.0e-14 + 7.7 * 9.9 * 9.9;
        assert!((q.get(0, 0) - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn matrix_market_format() {
        let a = small();
        let mm = a.to_matrix_market();
        assert_eq!(
            mm,
            "%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 1\n1 3 2.5\n2 2 3\n"
        );
    }

    #[test]
    #[should_panic(expected = "spmv dimension mismatch")]
    fn spmv_rejects_bad_dimension() {
        let a = small();
        let _ = a.mul_vec(&[1.0, 2.0]);
    }
}
