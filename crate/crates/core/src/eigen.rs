//! Cyclic Jacobi eigensolver for small dense symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` once and applies the
//! plane rotation that annihilates `a[p][q]`. Rotations whose target entry is
//! already negligible against the current diagonal are skipped (threshold
//! Jacobi). Accumulating the rotations yields the eigenvector frame.

use thiserror::Error;

use crate::linalg::Matrix;

/// Sweep cap before giving up.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}

/// Eigenvalues in descending order and the matching orthonormal eigenvectors
/// stored as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

/// Full spectral decomposition of a symmetric matrix.
pub fn symmetric_eigen(m: &Matrix) -> Result<SymmetricEigen, EigenError> {
    if !m.is_square() {
        return Err(EigenError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let scale = m.max_abs();
    let asym = m.asymmetry();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(EigenError::NotSymmetric(asym));
    }

    let n = m.rows();
    // symmetrize exactly so the rotations below can read either triangle
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut v = Matrix::identity(n);
    let frob = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = f64::EPSILON * frob;

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(EigenError::NoConvergence { sweeps, off_norm: off_diagonal_norm(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                // negligible against both diagonal entries: drop it
                let g = 100.0 * apq.abs();
                if sweeps > 4
                    && app.abs() + g == app.abs()
                    && aqq.abs() + g == aqq.abs()
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
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
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &Matrix, e: &SymmetricEigen) -> f64 {
        let n = m.rows();
        let mut worst = 0.0f64;
        for k in 0..n {
            let col = e.vectors.column(k);
            let mv = m.mul_vec(&col);
            for i in 0..n {
                worst = worst.max((mv[i] - e.values[k] * col[i]).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_is_sorted_descending() {
        let m = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, -2.0],
        ]);
        let e = symmetric_eigen(&m).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0, -2.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = symmetric_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&m, &e) < 1e-14);
    }

    #[test]
    fn frame_is_orthonormal_on_dense_input() {
        let n = 7;
        let m = Matrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            (a * 1.3 + b * 0.7).sin() + if i == j { 0.5 } else { 0.0 }
        });
        let e = symmetric_eigen(&m).unwrap();
        let vtv = e.vectors.transpose().mul(&e.vectors);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - expect).abs() < 1e-12);
            }
        }
        assert!(residual(&m, &e) < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_and_nonsquare() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(symmetric_eigen(&m), Err(EigenError::NotSymmetric(_))));
        let r = Matrix::zeros(2, 3);
        assert!(matches!(symmetric_eigen(&r), Err(EigenError::NotSquare { .. })));
    }
}
