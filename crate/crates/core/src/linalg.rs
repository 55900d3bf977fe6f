//! Small dense linear-algebra helpers shared across the pipeline.

use nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and eigenvector signs fixed (largest-magnitude entry
/// positive) so repeated runs are bit-identical.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        sign_fix(&mut col);
        vecs.set_column(dst, &col);
    }
    (vals, vecs)
}

/// Flips the vector so its largest-magnitude entry is positive (first such
/// entry on ties).
pub fn sign_fix(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        *v = -&*v;
    }
}

pub fn sign_fix_columns(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        let mut col = m.column(j).clone_owned();
        sign_fix(&mut col);
        m.set_column(j, &col);
    }
}

/// Frobenius inner product of two matrices.
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
pub fn sym_spectral_norm(m: &DMatrix<f64>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()))
}

/// Smallest eigenvalue of a symmetric matrix together with a unit eigenvector.
pub fn sym_min_eig(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let (vals, vecs) = sym_eigen_sorted(m);
    let n = m.nrows();
    (vals[n - 1], vecs.column(n - 1).clone_owned())
}

/// Normalizes every column to unit Euclidean norm.
pub fn normalize_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        let n = out.column(j).norm();
        if n > 0.0 {
            let col = out.column(j) / n;
            out.set_column(j, &col);
        }
    }
    out
}
