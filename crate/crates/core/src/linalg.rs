//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(A + A*)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

fn to_faer(a: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = to_faer(&hermitian_part(a))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver failed to converge");
    let values = eig.S().column_vector().iter().map(|v| v.re).collect();
    (values, from_faer(eig.U()))
}

/// Smallest eigenvalue and a unit eigenvector for it.
pub fn min_eigen(a: &CMatrix) -> (f64, CVector) {
    let (values, vectors) = hermitian_eigen(a);
    (values[0], vectors.column(0).into_owned())
}

fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    to_faer(&hermitian_part(a))
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("Hermitian eigensolver failed to converge")
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(a: &CMatrix) -> Option<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Some(Vec::new());
    }
    to_faer(a).eigenvalues().ok()
}

/// Thin SVD `A = U diag(s) V^*`, singular values in nonincreasing order.
pub fn svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return (CMatrix::zeros(rows, 0), Vec::new(), CMatrix::zeros(cols, 0));
    }
    let dec = to_faer(a).thin_svd().expect("SVD failed to converge");
    let s = dec.S().column_vector().iter().map(|v| v.re).collect();
    (from_faer(dec.U()), s, from_faer(dec.V()))
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    to_faer(a).singular_values().expect("SVD failed to converge")
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let s = Complex64::new(f(values[j]), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vectors.adjoint()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    singular_values(a).into_iter().fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Orthonormal basis (as columns) for the column space, dropping directions
/// whose singular value falls below `rel_tol * max`.
pub fn column_space(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let (u, s, _) = svd(a);
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMatrix::zeros(rows, 0);
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rel_tol * smax).collect();
    let mut out = CMatrix::zeros(rows, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// Orthonormal basis of the null space, threshold on singular values
/// relative to the largest one. Also returns the full singular spectrum.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> (CMatrix, Vec<f64>) {
    let cols = a.ncols();
    // pad so the SVD always returns a full right basis
    let padded = if a.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), a.shape()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (_, sv, v) = svd(&padded);
    let smax = sv.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= rel_tol * smax).collect();
    let mut out = CMatrix::zeros(cols, null.len());
    for (dst, &src) in null.iter().enumerate() {
        out.set_column(dst, &v.column(src));
    }
    (out, sv)
}
