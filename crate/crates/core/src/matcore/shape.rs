//! Shape operator sets and the invariants built from them: the squared norm
//! `S` of the second fundamental form, the Gram matrix of shape operators and
//! its spectrum, and the normal scalar curvature.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::jacobi::jacobi_eigen;
use super::mat::{frob_inner, sym_commutator, GenMat, SymMat};
use crate::error::{Error, Result};

/// Eigenvalues of a Gram matrix within `PSD_TOL·(1+‖g‖)` below zero are clipped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// Tolerance used to validate orthogonal frame changes.
pub const ORTHO_TOL: f64 = 1e-10;

/// The `m` shape operators `A^α = (h_ij^α)` at one point of an
/// `n`-dimensional submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperatorSet {
    n: usize,
    ops: Vec<SymMat>,
    minimal: bool,
}

impl ShapeOperatorSet {
    pub fn new(ops: Vec<SymMat>) -> Result<Self> {
        let n = match ops.first() {
            Some(a) => a.dim(),
            None => return Err(Error::Shape("a shape operator set needs m >= 1".into())),
        };
        if let Some(bad) = ops.iter().find(|a| a.dim() != n) {
            return Err(Error::Shape(format!(
                "shape operators must share dimension {n}, found {}",
                bad.dim()
            )));
        }
        Ok(ShapeOperatorSet {
            n,
            ops,
            minimal: false,
        })
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![SymMat::zeros(n); m])
    }

    /// Marks the set minimal after checking `|tr A^α| ≤ tol` for every α.
    pub fn into_minimal(mut self, tol: f64) -> Result<Self> {
        let worst = self.max_abs_trace();
        if worst > tol {
            return Err(Error::Precondition(format!(
                "trace {worst:e} exceeds minimality tolerance {tol:e}"
            )));
        }
        self.minimal = true;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[SymMat] {
        &self.ops
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    pub fn max_abs_trace(&self) -> f64 {
        self.ops.iter().fold(0.0, |w, a| w.max(a.trace().abs()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        ShapeOperatorSet {
            n: self.n,
            ops: self.ops.iter().map(|a| a.scaled(t)).collect(),
            minimal: self.minimal,
        }
    }
}

impl Serialize for ShapeOperatorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            n: usize,
            m: usize,
            ops: Vec<&'a [f64]>,
        }
        Wire {
            n: self.n,
            m: self.m(),
            ops: self.ops.iter().map(|a| a.as_gen().as_slice()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ShapeOperatorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            n: usize,
            m: usize,
            ops: Vec<Vec<f64>>,
        }
        let w = Wire::deserialize(deserializer)?;
        if w.ops.len() != w.m {
            return Err(D::Error::custom(format!(
                "m = {} but {} ops given",
                w.m,
                w.ops.len()
            )));
        }
        let ops = w
            .ops
            .into_iter()
            .map(|flat| SymMat::from_row_major(w.n, flat))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        ShapeOperatorSet::new(ops).map_err(D::Error::custom)
    }
}

/// Eigenvalues sorted non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// The `m×m` matrix `(⟨A^α, A^β⟩)`.
pub fn gram(ops: &ShapeOperatorSet) -> SymMat {
    let m = ops.m();
    let mut g = SymMat::zeros(m);
    for a in 0..m {
        for b in 0..=a {
            let v = frob_inner(ops.ops[a].as_gen(), ops.ops[b].as_gen()).expect("same dims");
            g.set(a, b, v);
        }
    }
    g
}

/// Eigenvalues of a Gram matrix, descending, with round-off negatives clipped.
pub fn lambda_spectrum(g: &SymMat) -> Result<Spectrum> {
    let eig = jacobi_eigen(g)?;
    let clip = PSD_TOL * (1.0 + g.as_gen().frob_norm());
    let mut values: Vec<f64> = eig
        .values
        .into_iter()
        .map(|v| if v.abs() <= clip { 0.0 } else { v })
        .collect();
    // stable sort keeps solver order among equal values
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(Spectrum { values })
}

/// `S = Σ_α ‖A^α‖²`.
pub fn total_s(ops: &ShapeOperatorSet) -> f64 {
    ops.ops.iter().map(SymMat::frob_norm2).sum()
}

/// `‖𝒜‖² = Σ_{α,β} ⟨A^α, A^β⟩²`.
pub fn gram_norm2(ops: &ShapeOperatorSet) -> f64 {
    gram(ops).frob_norm2()
}

/// `ρ⊥₀ = Σ_{α,β} ‖[A^α, A^β]‖²` over ordered pairs.
pub fn rho_perp0(ops: &ShapeOperatorSet) -> f64 {
    let mut s = 0.0;
    for a in 0..ops.m() {
        for b in (a + 1)..ops.m() {
            s += sym_commutator(&ops.ops[a], &ops.ops[b])
                .expect("same dims")
                .frob_norm2();
        }
    }
    2.0 * s
}

/// Normal scalar curvature `ρ⊥ = √ρ⊥₀ / (n(n−1))`.
pub fn rho_perp(ops: &ShapeOperatorSet, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "normal scalar curvature needs n >= 2, got {n}"
        )));
    }
    Ok(rho_perp0(ops).sqrt() / (n * (n - 1)) as f64)
}

fn check_orthogonal(o: &GenMat, dim: usize, what: &str) -> Result<()> {
    if o.rows() != dim || o.cols() != dim {
        return Err(Error::Shape(format!(
            "{what} rotation must be {dim}x{dim}, got {}x{}",
            o.rows(),
            o.cols()
        )));
    }
    let defect = o.orthogonality_defect();
    if defect > ORTHO_TOL {
        return Err(Error::Precondition(format!(
            "{what} matrix not orthogonal (defect {defect:e})"
        )));
    }
    Ok(())
}

/// Change of normal frame: `Ã^β = Σ_α O_{αβ} A^α`.
pub fn rotate_normal(ops: &ShapeOperatorSet, o: &GenMat) -> Result<ShapeOperatorSet> {
    let m = ops.m();
    check_orthogonal(o, m, "normal")?;
    let rotated = (0..m)
        .map(|b| {
            (0..m).fold(SymMat::zeros(ops.n), |acc, a| {
                acc.add_scaled(&ops.ops[a], o[(a, b)]).expect("same dims")
            })
        })
        .collect();
    Ok(ShapeOperatorSet {
        n: ops.n,
        ops: rotated,
        minimal: ops.minimal,
    })
}

/// Change of tangent frame: `A^α ↦ Qᵀ A^α Q`.
pub fn rotate_tangent(ops: &ShapeOperatorSet, q: &GenMat) -> Result<ShapeOperatorSet> {
    check_orthogonal(q, ops.n, "tangent")?;
    let rotated = ops
        .ops
        .iter()
        .map(|a| a.congruence(q))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeOperatorSet {
        n: ops.n,
        ops: rotated,
        minimal: ops.minimal,
    })
}
