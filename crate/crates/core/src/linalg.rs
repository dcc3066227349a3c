//! Small dense helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

pub type Factor = Cholesky<f64, Dyn>;

pub fn cholesky(m: &DMatrix<f64>) -> Option<Factor> {
    m.clone().cholesky()
}

/// Rows and columns `idx` of `m`, in the order given.
pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

pub fn subvector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |r, _| v[idx[r]])
}

/// Scatter `values` into a length-`p` zero vector at positions `idx`.
pub fn scatter(p: usize, idx: &[usize], values: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(p);
    for (k, &j) in idx.iter().enumerate() {
        out[j] = values[k];
    }
    out
}

pub fn is_unit_diagonal(m: &DMatrix<f64>, tol: f64) -> bool {
    (0..m.nrows()).all(|j| (m[(j, j)] - 1.0).abs() <= tol)
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn l1_norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Cofactor matrix `C[i][j] = (-1)^(i+j) det(M without row i, column j)`,
/// computed from the minors directly. Intended for the p <= 4 diagnostics.
pub fn cofactor_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(n, n, |i, j| {
        let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
        let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| m[(rows[r], cols[c])]);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}
