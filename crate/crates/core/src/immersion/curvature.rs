//! Algebraic curvature quantities computed from shape operators in an orthonormal frame.

use crate::error::{Error, Result};
use crate::matcore::{total_s, ShapeOperatorSet};

/// Normal curvature tensor `R⊥_{αβkl} = Σ_i (h_ik^α h_il^β − h_il^α h_ik^β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalCurvature {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl NormalCurvature {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, alpha: usize, beta: usize, k: usize, l: usize) -> f64 {
        self.data[((alpha * self.m + beta) * self.n + k) * self.n + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

pub fn normal_curvature(ops: &ShapeOperatorSet) -> NormalCurvature {
    let n = ops.n();
    let m = ops.m();
    let a = ops.ops();
    let mut data = vec![0.0; m * m * n * n];
    for alpha in 0..m {
        for beta in 0..m {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    for i in 0..n {
                        v += a[alpha].get(i, k) * a[beta].get(i, l)
                            - a[alpha].get(i, l) * a[beta].get(i, k);
                    }
                    data[((alpha * m + beta) * n + k) * n + l] = v;
                }
            }
        }
    }
    NormalCurvature { n, m, data }
}

/// `ρ⊥ = (2 / (n(n−1))) · √(Σ_{i<j} Σ_{r<s} R⊥_{rsij}²)`.
pub fn rho_perp_from_definition(ops: &ShapeOperatorSet, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "normal scalar curvature needs n >= 2, got {n}"
        )));
    }
    let r = normal_curvature(ops);
    let mut sum = 0.0;
    for i in 0..r.n {
        for j in i + 1..r.n {
            for a in 0..r.m {
                for b in a + 1..r.m {
                    sum += r.get(a, b, i, j).powi(2);
                }
            }
        }
    }
    Ok(2.0 / (n * (n - 1)) as f64 * sum.sqrt())
}

/// `R_ijij = 1 + Σ_α (h_ii^α h_jj^α − (h_ij^α)²)` for a unit-sphere ambient.
pub fn sectional_curvature(ops: &ShapeOperatorSet, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::Domain("sectional curvature needs i != j".into()));
    }
    if i >= ops.n() || j >= ops.n() {
        return Err(Error::Shape(format!(
            "frame index out of range for n = {}",
            ops.n()
        )));
    }
    Ok(1.0
        + ops
            .ops()
            .iter()
            .map(|a| a.get(i, i) * a.get(j, j) - a.get(i, j).powi(2))
            .sum::<f64>())
}

/// `max_α |tr Aᵅ|`.
pub fn minimality_residual(ops: &ShapeOperatorSet) -> f64 {
    ops.max_abs_trace()
}

/// Acceptance bound for [`minimality_residual`]: `1e-6 · (1 + √S)`.
pub fn minimality_bound(ops: &ShapeOperatorSet) -> f64 {
    1e-6 * (1.0 + total_s(ops).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{
        commutator,
        random::{random_ops, sample_rng},
        rho_perp, SymMat,
    };

    #[test]
    fn matches_commutator_entries() {
        let mut rng = sample_rng(7, 0);
        let ops = random_ops(4, 3, &mut rng);
        let r = normal_curvature(&ops);
        for a in 0..3 {
            for b in 0..3 {
                let c = commutator(ops.ops()[a].as_gen(), ops.ops()[b].as_gen()).unwrap();
                for k in 0..4 {
                    for l in 0..4 {
                        assert!((r.get(a, b, k, l) - c[(k, l)]).abs() < 1e-12);
                    }
                }
            }
        }
        let d = rho_perp_from_definition(&ops, 4).unwrap();
        let f = rho_perp(&ops, 4).unwrap();
        assert!((d - f).abs() <= 1e-12 * f.max(1.0));
    }

    #[test]
    fn commuting_ops_have_flat_normal_bundle() {
        let ops =
            ShapeOperatorSet::new(vec![SymMat::diag(&[1.0, -1.0]), SymMat::diag(&[2.0, 3.0])])
                .unwrap();
        assert_eq!(normal_curvature(&ops).max_abs(), 0.0);
        assert_eq!(rho_perp_from_definition(&ops, 2).unwrap(), 0.0);
    }

    #[test]
    fn sectional_and_minimality() {
        let zero = ShapeOperatorSet::zeros(3, 2).unwrap();
        assert_eq!(sectional_curvature(&zero, 0, 2).unwrap(), 1.0);
        assert!(sectional_curvature(&zero, 1, 1).is_err());
        assert_eq!(minimality_residual(&zero), 0.0);
        let clifford = ShapeOperatorSet::new(vec![SymMat::diag(&[1.0, -1.0])]).unwrap();
        assert_eq!(sectional_curvature(&clifford, 0, 1).unwrap(), 0.0);
        assert!(rho_perp_from_definition(&clifford, 1).is_err());
    }
}
