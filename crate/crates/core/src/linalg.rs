//! Sparse complex operators and the handful of dense routines the rest of the
//! crate needs (numeric kernels, real least squares).

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Square complex operator in compressed-row form.
///
/// Clifford generators built from Pauli strings are monomial (one entry per
/// row), so products and matrix-vector applications stay cheap even for the
/// 512-dimensional twisted modules.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    /// Builds an operator from per-row `(column, value)` lists. Duplicate
    /// columns are summed and exact zeros dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        assert_eq!(rows.len(), dim, "row count must equal dimension");
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                debug_assert!(c < dim);
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_rows(diag.len(), diag.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect())
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self::from_rows(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.dim, "vector length must equal operator dimension");
        DVector::from_iterator(self.dim, (0..self.dim).map(|i| self.row(i).map(|(c, a)| a * v[c]).sum()))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        if s == ZERO {
            return Self::zero(self.dim);
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                rows[c].push((i, v.conj()));
            }
        }
        Self::from_rows(self.dim, rows)
    }

    pub fn kron(&self, other: &SparseOp) -> Self {
        let dim = self.dim * other.dim;
        let mut rows = Vec::with_capacity(dim);
        for i in 0..self.dim {
            for k in 0..other.dim {
                let mut row = Vec::new();
                for (j, a) in self.row(i) {
                    for (l, b) in other.row(k) {
                        row.push((j * other.dim + l, a * b));
                    }
                }
                rows.push(row);
            }
        }
        Self::from_rows(dim, rows)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Linear combination `Σ c_t A_t` of operators of equal dimension.
    pub fn linear_combination<'a>(dim: usize, terms: impl IntoIterator<Item = (C64, &'a SparseOp)>) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (c, op) in terms {
            assert_eq!(op.dim, dim, "operator dimension mismatch");
            if c == ZERO {
                continue;
            }
            for (i, row) in rows.iter_mut().enumerate() {
                row.extend(op.row(i).map(|(col, v)| (col, c * v)));
            }
        }
        Self::from_rows(dim, rows)
    }
}

impl Mul for &SparseOp {
    type Output = SparseOp;

    fn mul(self, rhs: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let rows = (0..self.dim)
            .map(|i| {
                let mut row = Vec::new();
                for (k, a) in self.row(i) {
                    row.extend(rhs.row(k).map(|(j, b)| (j, a * b)));
                }
                row
            })
            .collect();
        SparseOp::from_rows(self.dim, rows)
    }
}

impl Add for &SparseOp {
    type Output = SparseOp;

    fn add(self, rhs: &SparseOp) -> SparseOp {
        SparseOp::linear_combination(self.dim, [(ONE, self), (ONE, rhs)])
    }
}

impl Sub for &SparseOp {
    type Output = SparseOp;

    fn sub(self, rhs: &SparseOp) -> SparseOp {
        SparseOp::linear_combination(self.dim, [(ONE, self), (-ONE, rhs)])
    }
}

impl Neg for &SparseOp {
    type Output = SparseOp;

    fn neg(self) -> SparseOp {
        self.scale(-ONE)
    }
}

/// Kronecker product of a list of operators, left to right.
pub fn kron_all(ops: &[&SparseOp]) -> SparseOp {
    ops.iter().fold(SparseOp::identity(1), |acc, op| acc.kron(op))
}

/// Numeric kernel of a stack of operators `[A_1; A_2; …]`.
#[derive(Clone, Debug)]
pub struct Nullspace {
    /// Orthonormal kernel basis, one column per vector.
    pub basis: DMatrix<C64>,
    /// Largest singular value of the stacked system.
    pub sigma_max: f64,
    /// Smallest singular values of the stacked system, ascending.
    pub smallest: Vec<f64>,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn vector(&self, j: usize) -> DVector<C64> {
        self.basis.column(j).into_owned()
    }
}

/// Kernel of the stacked system with singular values at most
/// `rel_tol · σ_max` treated as zero.
///
/// The Gram matrix `Σ A_tᴴ A_t` is diagonalised first to isolate a small
/// candidate subspace; the stacked system restricted to that subspace is
/// then decomposed with an SVD so the threshold applies to genuine singular
/// values rather than their squares.
pub fn nullspace(ops: &[SparseOp], rel_tol: f64) -> Nullspace {
    assert!(!ops.is_empty(), "nullspace needs at least one operator");
    let dim = ops[0].dim();
    let mut gram = DMatrix::<C64>::zeros(dim, dim);
    for op in ops {
        assert_eq!(op.dim(), dim, "operator dimension mismatch");
        for i in 0..dim {
            let entries: Vec<_> = op.row(i).collect();
            for &(a, va) in &entries {
                let ca = va.conj();
                for &(b, vb) in &entries {
                    gram[(a, b)] += ca * vb;
                }
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let sigma_max = lambda_max.sqrt();
    if sigma_max == 0.0 {
        return Nullspace {
            basis: DMatrix::identity(dim, dim),
            sigma_max,
            smallest: vec![0.0; dim.min(3)],
        };
    }

    // Candidates: σ ≤ 1e-4 σ_max, far above the ε·λ_max noise floor of the Gram eigenvalues.
    let cand: Vec<usize> = (0..dim)
        .filter(|&j| eig.eigenvalues[j].max(0.0) <= 1e-8 * lambda_max)
        .collect();
    let mut others: Vec<f64> = (0..dim)
        .filter(|j| !cand.contains(j))
        .map(|j| eig.eigenvalues[j].max(0.0).sqrt())
        .collect();
    others.sort_by(f64::total_cmp);

    if cand.is_empty() {
        return Nullspace { basis: DMatrix::zeros(dim, 0), sigma_max, smallest: others.into_iter().take(3).collect() };
    }

    let v = DMatrix::from_fn(dim, cand.len(), |i, j| eig.eigenvectors[(i, cand[j])]);
    let rows: usize = ops.len() * dim;
    let mut stacked = DMatrix::<C64>::zeros(rows, cand.len());
    for (t, op) in ops.iter().enumerate() {
        for c in 0..cand.len() {
            let col = op.apply(&v.column(c).into_owned());
            stacked.view_mut((t * dim, c), (dim, 1)).copy_from(&col);
        }
    }
    let svd = SVD::new(stacked, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut kernel_cols = Vec::new();
    let mut singular: Vec<f64> = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        singular.push(s);
        if s <= rel_tol * sigma_max {
            let w = v_t.row(idx).adjoint();
            kernel_cols.push(&v * w);
        }
    }
    singular.extend(others);
    singular.sort_by(f64::total_cmp);
    let basis = if kernel_cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&kernel_cols)
    };
    Nullspace { basis, sigma_max, smallest: singular.into_iter().take(3).collect() }
}

/// Minimal-norm least-squares solution of `A x ≈ b`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub x: DVector<f64>,
    pub rank: usize,
    pub residual: f64,
}

/// Reusable least-squares solver for a fixed real matrix.
pub struct LeastSquaresSolver {
    a: DMatrix<f64>,
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    eps: f64,
    rank: usize,
}

impl LeastSquaresSolver {
    pub fn new(a: DMatrix<f64>, rcond: f64) -> Self {
        let svd = SVD::new(a.clone(), true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let eps = (rcond * smax).max(f64::MIN_POSITIVE);
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        Self { a, svd, eps, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    pub fn solve(&self, b: &DVector<f64>) -> LeastSquares {
        let x = if self.rank == 0 {
            DVector::zeros(self.a.ncols())
        } else {
            self.svd.solve(b, self.eps).expect("both singular vector sets computed")
        };
        let residual = (&self.a * &x - b).norm();
        LeastSquares { x, rank: self.rank, residual }
    }
}

/// Orthonormal basis (columns) of the real kernel of `a`.
pub fn real_nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    let padded = if rows < cols { a.clone().resize_vertically(cols, 0.0) } else { a.clone() };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * smax.max(1.0))
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if keep.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&keep)
    }
}

/// `Σ A_{ij} B_{ij}`.
pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Σ conj(b_i) a_i — linear in `a`, conjugate-linear in `b`.
pub fn herm_dot(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> SparseOp {
        SparseOp::from_rows(2, vec![vec![(1, ONE)], vec![(0, ONE)]])
    }

    fn pauli_y() -> SparseOp {
        SparseOp::from_rows(2, vec![vec![(1, -I)], vec![(0, I)]])
    }

    #[test]
    fn products_match_dense() {
        let x = pauli_x();
        let y = pauli_y();
        let xy = &x * &y;
        let dense = x.to_dense() * y.to_dense();
        assert!((xy.to_dense() - dense).norm() < 1e-15);
        // XY = iZ
        assert_eq!(xy.to_dense()[(0, 0)], I);
        assert_eq!(xy.to_dense()[(1, 1)], -I);
    }

    #[test]
    fn duplicates_merge_and_zeros_drop() {
        let op = SparseOp::from_rows(2, vec![vec![(0, ONE), (0, -ONE), (1, ONE)], vec![]]);
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn kron_and_adjoint() {
        let x = pauli_x();
        let y = pauli_y();
        let k = x.kron(&y);
        let dense = k.to_dense();
        assert_eq!(dense.nrows(), 4);
        assert_eq!(dense[(0, 3)], -I);
        assert!((k.adjoint().to_dense() - dense.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn nullspace_of_projector_complement() {
        // Kernel of diag(0, 1, 1, 0) is spanned by e_0, e_3.
        let op = SparseOp::diagonal(&[ZERO, ONE, ONE, ZERO]);
        let ns = nullspace(std::slice::from_ref(&op), 1e-8);
        assert_eq!(ns.dim(), 2);
        for j in 0..2 {
            assert!(op.apply(&ns.vector(j)).norm() < 1e-14);
        }
    }

    #[test]
    fn nullspace_of_stacked_system() {
        // X - 1 and Y - 1 share no kernel; X - 1 alone has (1, 1)/√2.
        let x = pauli_x();
        let y = pauli_y();
        let id = SparseOp::identity(2);
        let ns = nullspace(&[&x - &id], 1e-8);
        assert_eq!(ns.dim(), 1);
        let ns = nullspace(&[&x - &id, &y - &id], 1e-8);
        assert_eq!(ns.dim(), 0);
        assert!(ns.smallest[0] > 0.1);
    }

    #[test]
    fn least_squares_minimal_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let solver = LeastSquaresSolver::new(a, 1e-12);
        assert_eq!(solver.rank(), 1);
        let sol = solver.solve(&DVector::from_vec(vec![2.0, 2.0]));
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_nullspace_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = real_nullspace(&a, 1e-10);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-14);
    }
}
