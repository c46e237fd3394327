//! Cyclic Jacobi eigensolver for small symmetric matrices.

use super::mat::{GenMat, SymMat};
use crate::error::{Error, Result};

/// Stop once the off-diagonal Frobenius norm is at most this fraction of ‖g‖.
pub const EIG_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition `g = Q diag(values) Qᵀ`, eigenpairs in solver order
/// (not sorted). Columns of `vectors` are the eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: GenMat,
    pub sweeps: usize,
}

fn off_norm2(a: &GenMat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s
}

pub fn jacobi_eigen(g: &SymMat) -> Result<Eigen> {
    jacobi_eigen_with(g, EIG_TOL, MAX_SWEEPS)
}

pub fn jacobi_eigen_with(g: &SymMat, tol: f64, max_sweeps: usize) -> Result<Eigen> {
    let n = g.dim();
    let mut a = g.as_gen().clone();
    let mut v = GenMat::identity(n);
    let norm = a.frob_norm();
    let threshold = tol * norm;

    let mut sweeps = 0;
    loop {
        let off = off_norm2(&a).sqrt();
        if off <= threshold || norm == 0.0 {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off,
                norm,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // rotation angle from cot(2θ) = (a_qq − a_pp) / (2 a_pq), smaller root
                let theta = (aqq - app) / (2.0 * apq);
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

    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(Eigen {
        values,
        vectors: v,
        sweeps,
    })
}

impl Eigen {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> SymMat {
        let n = self.values.len();
        let mut out = GenMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)])
                    .sum();
            }
        }
        SymMat::from_gen(&out).expect("square")
    }
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_spd(g: &SymMat) -> Result<SymMat> {
    let eig = jacobi_eigen(g)?;
    if let Some(bad) = eig.values.iter().find(|v| **v <= 0.0) {
        return Err(Error::Domain(format!(
            "matrix is not positive definite (eigenvalue {bad:e})"
        )));
    }
    let scaled = Eigen {
        values: eig.values.iter().map(|v| 1.0 / v.sqrt()).collect(),
        vectors: eig.vectors,
        sweeps: eig.sweeps,
    };
    Ok(scaled.reconstruct())
}
