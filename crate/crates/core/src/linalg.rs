use faer::complex_native::c64;
use faer::{Mat, Side};

use crate::C64;

// faer's tridiagonal eigensolver loses relative accuracy on matrices with
// large absolute entries (rad/s scale), so both solvers work on H/‖H‖_max.

fn max_abs_real(m: &Mat<f64>) -> f64 {
    let mut s = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s = s.max(m.read(i, j).abs());
        }
    }
    s
}

fn max_abs_complex(m: &Mat<c64>) -> f64 {
    let mut s = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m.read(i, j);
            s = s.max(z.re.hypot(z.im));
        }
    }
    s
}

/// Eigenpairs of a real symmetric matrix, ascending; `vecs[j]` is the j-th
/// eigenvector.
pub(crate) fn eigh_real(m: &Mat<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.nrows();
    let scale = max_abs_real(m);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let scaled = Mat::<f64>::from_fn(n, n, |i, j| m.read(i, j) / scale);
    let eig = scaled.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let vals = (0..n).map(|i| s.read(i) * scale).collect();
    let vecs = (0..n).map(|j| (0..n).map(|i| u.read(i, j)).collect()).collect();
    (vals, vecs)
}

/// Eigenpairs of a complex Hermitian matrix (lower triangle used), ascending.
pub(crate) fn eigh_complex(m: &Mat<c64>) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = m.nrows();
    let scale = max_abs_complex(m);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let inv = 1.0 / scale;
    let scaled = Mat::<c64>::from_fn(n, n, |i, j| {
        let z = m.read(i, j);
        c64::new(z.re * inv, z.im * inv)
    });
    let eig = scaled.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let vals = (0..n).map(|i| s.read(i).re * scale).collect();
    let vecs = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let z = u.read(i, j);
                    C64::new(z.re, z.im)
                })
                .collect()
        })
        .collect();
    (vals, vecs)
}

pub(crate) fn to_faer(z: C64) -> c64 {
    c64::new(z.re, z.im)
}
