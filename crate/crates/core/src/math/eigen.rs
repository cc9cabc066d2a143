//! Cyclic Jacobi eigendecomposition for small symmetric matrices.
//!
//! The pooled NIQE covariance is 36x36; a dependency-free solver is plenty.

use ndarray::{Array1, Array2};

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix.
pub fn eigh(mat: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols(), "matrix must be square");
    let mut a = mat.clone();
    let mut v = Array2::<f64>::eye(n);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigvals = Array1::from_iter((0..n).map(|i| a[(i, i)]));
    (eigvals, v)
}

/// Pseudo-inverse of a symmetric positive semidefinite matrix with an
/// eigenvalue floor: modes below `floor` are dropped.
pub fn pinv_psd(mat: &Array2<f64>, floor: f64) -> Array2<f64> {
    let (vals, vecs) = eigh(mat);
    let n = mat.nrows();
    let mut out = Array2::<f64>::zeros((n, n));
    for k in 0..n {
        if vals[k] > floor {
            let inv = 1.0 / vals[k];
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += inv * vecs[(i, k)] * vecs[(j, k)];
                }
            }
        }
    }
    out
}
