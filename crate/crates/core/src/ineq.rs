//! Inequalities and identities as signed gap functionals.
//!
//! Every inequality `small ≤ large` is exposed as `large − small`, so "the
//! inequality holds" always reads `gap ≥ −tol·scale` with `scale = large`.
//! Covered here: the DDVV and Böttcher–Wenzel commutator inequalities, the
//! three algebraic bounds that control the Laplacian of `ρ⊥₀`, the pointwise
//! Simons balance, and the pinching thresholds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::digest::FloatDigest;
use crate::error::{Error, Result};
use crate::matcore::{
    commutator, frob_inner, gram, gram_norm2, lambda_spectrum, rho_perp0, sym_commutator, total_s,
    GenMat, ShapeOperatorSet, SymMat,
};

/// Relative tolerance for every gap sweep.
pub const GAP_TOL: f64 = 1e-9;

/// Covariant derivative of the second fundamental form: `h_ijk^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct NablaH {
    n: usize,
    m: usize,
    // index order α, i, j, k
    data: Vec<f64>,
}

impl NablaH {
    pub fn zeros(n: usize, m: usize) -> Self {
        NablaH {
            n,
            m,
            data: vec![0.0; m * n * n * n],
        }
    }

    fn idx(&self, alpha: usize, i: usize, j: usize, k: usize) -> usize {
        ((alpha * self.n + i) * self.n + j) * self.n + k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, alpha: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(alpha, i, j, k)]
    }

    pub fn set(&mut self, alpha: usize, i: usize, j: usize, k: usize, v: f64) {
        let at = self.idx(alpha, i, j, k);
        self.data[at] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, t: f64) -> Self {
        NablaH {
            n: self.n,
            m: self.m,
            data: self.data.iter().map(|x| x * t).collect(),
        }
    }

    /// Averages over all permutations of `(i, j, k)`.
    pub fn symmetrized(&self) -> Self {
        let mut out = NablaH::zeros(self.n, self.m);
        for a in 0..self.m {
            for i in 0..self.n {
                for j in 0..self.n {
                    for k in 0..self.n {
                        let s = self.get(a, i, j, k)
                            + self.get(a, i, k, j)
                            + self.get(a, j, i, k)
                            + self.get(a, j, k, i)
                            + self.get(a, k, i, j)
                            + self.get(a, k, j, i);
                        out.set(a, i, j, k, s / 6.0);
                    }
                }
            }
        }
        out
    }

    /// Raw standard normal draws, fully symmetrized in `(i, j, k)`.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        let mut raw = NablaH::zeros(n, m);
        for x in raw.data.iter_mut() {
            *x = rng.sample(rand_distr::StandardNormal);
        }
        raw.symmetrized()
    }

    /// `|∇h|² = Σ (h_ijk^α)²`.
    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `max |h_ijk − h_ikj|` and `max |h_ijk − h_jik|`, combined.
    pub fn codazzi_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.m {
            for i in 0..self.n {
                for j in 0..self.n {
                    for k in 0..self.n {
                        let v = self.get(a, i, j, k);
                        worst = worst
                            .max((v - self.get(a, i, k, j)).abs())
                            .max((v - self.get(a, j, i, k)).abs());
                    }
                }
            }
        }
        worst
    }

    /// `∇_{e_k} A^α` as the symmetric matrix `(h_ijk^α)_ij`.
    pub fn derivative_op(&self, alpha: usize, k: usize) -> SymMat {
        let mut out = SymMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..=i {
                out.set(
                    i,
                    j,
                    0.5 * (self.get(alpha, i, j, k) + self.get(alpha, j, i, k)),
                );
            }
        }
        out
    }
}

/// The two sides of an inequality `small ≤ large`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapTerms {
    pub large: f64,
    pub small: f64,
}

impl GapTerms {
    pub fn gap(&self) -> f64 {
        self.large - self.small
    }

    /// `gap / large`, or 0 when both sides vanish.
    pub fn normalized(&self) -> f64 {
        let scale = self.large.abs();
        if scale == 0.0 {
            if self.small <= 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            self.gap() / scale
        }
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.gap() >= -rel_tol * self.large.abs()
    }
}

pub fn ddvv_terms(bs: &[SymMat]) -> Result<GapTerms> {
    let Some(first) = bs.first() else {
        return Ok(GapTerms {
            large: 0.0,
            small: 0.0,
        });
    };
    if let Some(bad) = bs.iter().find(|b| b.dim() != first.dim()) {
        return Err(Error::Shape(format!(
            "DDVV needs equal dimensions, got {} and {}",
            first.dim(),
            bad.dim()
        )));
    }
    let norms: f64 = bs.iter().map(SymMat::frob_norm2).sum();
    let mut comm = 0.0;
    for r in 0..bs.len() {
        for s in (r + 1)..bs.len() {
            comm += sym_commutator(&bs[r], &bs[s])?.frob_norm2();
        }
    }
    Ok(GapTerms {
        large: norms * norms,
        small: 2.0 * comm,
    })
}

/// `(Σ‖B_r‖²)² − Σ_{r,s}‖[B_r,B_s]‖²`.
pub fn ddvv_gap(bs: &[SymMat]) -> Result<f64> {
    Ok(ddvv_terms(bs)?.gap())
}

pub fn bw_terms(x: &GenMat, y: &GenMat) -> Result<GapTerms> {
    let c = commutator(x, y)?;
    Ok(GapTerms {
        large: 2.0 * x.frob_norm2() * y.frob_norm2(),
        small: c.frob_norm2(),
    })
}

/// `2‖X‖²‖Y‖² − ‖[X,Y]‖²`.
pub fn bw_gap(x: &GenMat, y: &GenMat) -> Result<f64> {
    Ok(bw_terms(x, y)?.gap())
}

fn all_commutators(ops: &ShapeOperatorSet) -> Vec<Vec<GenMat>> {
    let a = ops.ops();
    (0..a.len())
        .map(|i| {
            (0..a.len())
                .map(|j| sym_commutator(&a[i], &a[j]).expect("same dims"))
                .collect()
        })
        .collect()
}

/// `Σ_{α,β,γ} ⟨A^α,A^γ⟩ ⟨[A^β,A^γ],[A^α,A^β]⟩`.
pub fn term_t1(ops: &ShapeOperatorSet) -> f64 {
    let g = gram(ops);
    let c = all_commutators(ops);
    let m = ops.m();
    let mut total = 0.0;
    for a in 0..m {
        for b in 0..m {
            for gm in 0..m {
                let gag = g.get(a, gm);
                if gag == 0.0 {
                    continue;
                }
                total += gag * frob_inner(&c[b][gm], &c[a][b]).expect("same dims");
            }
        }
    }
    total
}

pub fn lemma32_terms(ops: &ShapeOperatorSet) -> Result<GapTerms> {
    let lambda1 = lambda_spectrum(&gram(ops))?.lambda1();
    Ok(GapTerms {
        large: lambda1 * rho_perp0(ops),
        small: -term_t1(ops),
    })
}

/// `λ₁ ρ⊥₀ + T₁`.
pub fn lemma32_gap(ops: &ShapeOperatorSet) -> Result<f64> {
    Ok(lemma32_terms(ops)?.gap())
}

/// `Σ_α ‖Σ_γ [[A^α,A^γ],A^γ]‖²`.
pub fn term_t2(ops: &ShapeOperatorSet) -> f64 {
    let c = all_commutators(ops);
    let a = ops.ops();
    let n = ops.n();
    let mut total = 0.0;
    for (alpha, row) in c.iter().enumerate() {
        let mut acc = GenMat::zeros(n, n);
        for (gm, cag) in row.iter().enumerate() {
            if gm == alpha {
                continue;
            }
            let inner = commutator(cag, a[gm].as_gen()).expect("same dims");
            acc = acc.add_scaled(&inner, 1.0).expect("same dims");
        }
        total += acc.frob_norm2();
    }
    total
}

pub fn lemma34_terms(ops: &ShapeOperatorSet) -> GapTerms {
    GapTerms {
        large: 2.0 * total_s(ops) * rho_perp0(ops),
        small: term_t2(ops),
    }
}

/// `2 S ρ⊥₀ − T₂`.
pub fn lemma34_gap(ops: &ShapeOperatorSet) -> f64 {
    lemma34_terms(ops).gap()
}

/// The two intermediate bounds in the estimate of `T₂`:
/// `T₂ ≤ Σ_α (Σ_γ √2 ‖[A^α,A^γ]‖ ‖A^γ‖)² ≤ 2 S ρ⊥₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma34Chain {
    pub t2: f64,
    pub middle: f64,
    pub upper: f64,
}

pub fn lemma34_chain(ops: &ShapeOperatorSet) -> Lemma34Chain {
    let c = all_commutators(ops);
    let norms: Vec<f64> = ops.ops().iter().map(|a| a.frob_norm2().sqrt()).collect();
    let middle = c
        .iter()
        .map(|row| {
            let s: f64 = row
                .iter()
                .zip(&norms)
                .map(|(cag, ng)| 2f64.sqrt() * cag.frob_norm() * ng)
                .sum();
            s * s
        })
        .sum();
    Lemma34Chain {
        t2: term_t2(ops),
        middle,
        upper: 2.0 * total_s(ops) * rho_perp0(ops),
    }
}

fn check_nabla(ops: &ShapeOperatorSet, nh: &NablaH) -> Result<()> {
    if nh.n() != ops.n() || nh.m() != ops.m() {
        return Err(Error::Shape(format!(
            "NablaH is (n={}, m={}) but shape operators are (n={}, m={})",
            nh.n(),
            nh.m(),
            ops.n(),
            ops.m()
        )));
    }
    Ok(())
}

/// `Σ_{α,β} ⟨Σ_k [∇_k A^α, ∇_k A^β], [A^α, A^β]⟩`.
pub fn term_t3(ops: &ShapeOperatorSet, nh: &NablaH) -> Result<f64> {
    check_nabla(ops, nh)?;
    let c = all_commutators(ops);
    let (n, m) = (ops.n(), ops.m());
    let mut total = 0.0;
    for k in 0..n {
        let d: Vec<SymMat> = (0..m).map(|a| nh.derivative_op(a, k)).collect();
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                total += frob_inner(&sym_commutator(&d[a], &d[b])?, &c[a][b])?;
            }
        }
    }
    Ok(total)
}

pub fn lemma33_terms(ops: &ShapeOperatorSet, nh: &NablaH) -> Result<GapTerms> {
    let t3 = term_t3(ops, nh)?;
    Ok(GapTerms {
        large: nh.norm2() * rho_perp0(ops).sqrt(),
        small: -t3,
    })
}

/// `|∇h|² √ρ⊥₀ + T₃`.
pub fn lemma33_gap(ops: &ShapeOperatorSet, nh: &NablaH) -> Result<f64> {
    Ok(lemma33_terms(ops, nh)?.gap())
}

/// `n S − ρ⊥₀ − ‖𝒜‖²`; zero wherever the second fundamental form is parallel.
pub fn simons_balance(ops: &ShapeOperatorSet, n: usize) -> f64 {
    n as f64 * total_s(ops) - rho_perp0(ops) - gram_norm2(ops)
}

/// Upper bound for `ρ⊥` in the `λ₁` pinching hypothesis:
/// `inf(n − λ₁) / (√2 n (n−1))`.
pub fn thm11_bound(inf_n_minus_lambda1: f64, n: usize) -> f64 {
    let nf = n as f64;
    inf_n_minus_lambda1 / (2f64.sqrt() * nf * (nf - 1.0))
}

/// Discriminant and branch bounds for constant normal scalar curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cor13Delta {
    pub delta: f64,
    pub vol: f64,
    /// `ρ⊥` must be at most this (first branch), when `δ ≥ 0`.
    pub low: Option<f64>,
    /// ... or at least this (second branch).
    pub high: Option<f64>,
}

/// `samples` are `(S(p), w_p)` quadrature pairs; integrals are weighted sums.
pub fn cor13_delta(samples: &[(f64, f64)], n: usize) -> Result<Cor13Delta> {
    if samples.is_empty() {
        return Err(Error::Domain("no quadrature samples".into()));
    }
    if let Some((_, w)) = samples.iter().find(|(_, w)| !(*w > 0.0)) {
        return Err(Error::Domain(format!(
            "quadrature weight {w} is not positive"
        )));
    }
    let nf = n as f64;
    let vol: f64 = samples.iter().map(|(_, w)| w).sum();
    let int_3s_minus_n: f64 = samples.iter().map(|(s, w)| (3.0 * s - nf) * w).sum();
    let int_s_s_minus_n: f64 = samples.iter().map(|(s, w)| s * (s - nf) * w).sum();
    let delta = int_3s_minus_n * int_3s_minus_n - 4.0 * vol * int_s_s_minus_n;
    let (low, high) = if delta >= 0.0 {
        let denom = 2.0 * nf * (nf - 1.0) * vol;
        let root = delta.sqrt();
        (
            Some((-int_3s_minus_n - root) / denom),
            Some((-int_3s_minus_n + root) / denom),
        )
    } else {
        (None, None)
    };
    Ok(Cor13Delta {
        delta,
        vol,
        low,
        high,
    })
}

/// `(n − 3S + √(5S² − 2nS + n²)) / (2n(n−1))`.
pub fn cor14_threshold(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    (nf - 3.0 * s + (5.0 * s * s - 2.0 * nf * s + nf * nf).sqrt()) / (2.0 * nf * (nf - 1.0))
}

/// Pointwise integrand of the contradiction argument, with `C = max ρ⊥₀`.
pub fn key_integrand(ops: &ShapeOperatorSet, n: usize, c: f64) -> Result<f64> {
    if c < 0.0 {
        return Err(Error::Domain(format!("C must be nonnegative, got {c}")));
    }
    let nf = n as f64;
    let rho0 = rho_perp0(ops);
    let s = total_s(ops);
    let lambda1 = lambda_spectrum(&gram(ops))?.lambda1();
    let root_c = c.sqrt();
    Ok(if c == 0.0 {
        rho0 * (root_c - nf + lambda1) + root_c * s * (lambda1 - nf) + 2.0 * s * rho0
    } else {
        rho0 * (root_c - nf + lambda1) + root_c * s * (-nf + lambda1 + 2.0 * rho0 / root_c)
    })
}

/// One evaluated gap, as emitted in JSON-lines sweep logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub name: String,
    pub value: f64,
    pub seed: Option<u64>,
    pub inputs_digest: String,
}

impl GapReport {
    pub fn new(name: &str, value: f64, seed: Option<u64>, inputs: &[f64]) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain(format!("gap {name} is not finite: {value}")));
        }
        let mut d = FloatDigest::new();
        d.push_all(inputs);
        Ok(GapReport {
            name: name.to_string(),
            value,
            seed,
            inputs_digest: d.finish(),
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Flattened entries of a shape operator set, for digests.
pub fn ops_entries(ops: &ShapeOperatorSet) -> Vec<f64> {
    ops.ops()
        .iter()
        .flat_map(|a| a.as_gen().as_slice().iter().copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random::{random_ops, sample_rng};
    use crate::matcore::rotate_normal;

    fn pauli() -> (SymMat, SymMat) {
        (
            SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            SymMat::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap(),
        )
    }

    /// Naive loop oracles written independently of the production summation order.
    fn naive_t2(ops: &ShapeOperatorSet) -> f64 {
        let a = ops.ops();
        let n = ops.n();
        let mut total = 0.0;
        for alpha in 0..a.len() {
            for i in 0..n {
                for j in 0..n {
                    let mut entry = 0.0;
                    for gm in 0..a.len() {
                        // [[A,G],G]_ij expanded as A G G − 2 G A G + G G A
                        for p in 0..n {
                            for q in 0..n {
                                let (ag, g) = (&a[alpha], &a[gm]);
                                entry += ag.get(i, p) * g.get(p, q) * g.get(q, j)
                                    - 2.0 * g.get(i, p) * ag.get(p, q) * g.get(q, j)
                                    + g.get(i, p) * g.get(p, q) * ag.get(q, j);
                            }
                        }
                    }
                    total += entry * entry;
                }
            }
        }
        total
    }

    fn naive_t3(ops: &ShapeOperatorSet, nh: &NablaH) -> f64 {
        let a = ops.ops();
        let n = ops.n();
        let m = ops.m();
        let mut total = 0.0;
        for al in 0..m {
            for be in 0..m {
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut dc = 0.0;
                            let mut c = 0.0;
                            for p in 0..n {
                                dc += nh.get(al, i, p, k) * nh.get(be, p, j, k)
                                    - nh.get(be, i, p, k) * nh.get(al, p, j, k);
                                c += a[al].get(i, p) * a[be].get(p, j)
                                    - a[be].get(i, p) * a[al].get(p, j);
                            }
                            total += dc * c;
                        }
                    }
                }
            }
        }
        total
    }

    #[test]
    fn ddvv_examples() {
        let (b1, b2) = pauli();
        assert_eq!(ddvv_gap(&[b1.clone(), b2.clone()]).unwrap(), 0.0);
        assert_eq!(ddvv_gap(std::slice::from_ref(&b1)).unwrap(), 4.0);
        assert!(ddvv_gap(&[b1, SymMat::zeros(3)]).is_err());
    }

    #[test]
    fn bw_examples() {
        let x = GenMat::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let y = x.transpose();
        assert_eq!(
            commutator(&x, &y).unwrap().to_rows(),
            vec![vec![1.0, 0.0], vec![0.0, -1.0]]
        );
        assert_eq!(bw_gap(&x, &y).unwrap(), 0.0);
        let z = GenMat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(bw_gap(&z, &z).unwrap(), 2.0 * 30.0 * 30.0);
        assert!(bw_gap(&z, &GenMat::identity(3)).is_err());
    }

    #[test]
    fn t1_is_minus_weighted_commutators_in_diagonal_gram_frame() {
        let mut rng = sample_rng(11, 0);
        let ops = random_ops(4, 3, &mut rng);
        // rotate to the frame diagonalizing the Gram matrix
        let eig = crate::matcore::jacobi_eigen(&gram(&ops)).unwrap();
        let rotated = rotate_normal(&ops, &eig.vectors).unwrap();
        let g = gram(&rotated);
        assert!(
            g.get(0, 1).abs() < 1e-10 && g.get(0, 2).abs() < 1e-10 && g.get(1, 2).abs() < 1e-10
        );
        let mut expected = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                expected -= rotated.ops()[a].frob_norm2()
                    * sym_commutator(&rotated.ops()[a], &rotated.ops()[b])
                        .unwrap()
                        .frob_norm2();
            }
        }
        let t1 = term_t1(&rotated);
        assert!((t1 - expected).abs() <= 1e-10 * expected.abs());
        assert!((term_t1(&ops) - t1).abs() <= 1e-10 * expected.abs());
    }

    #[test]
    fn trivial_zeros_for_single_and_commuting_families() {
        let one = ShapeOperatorSet::new(vec![SymMat::diag(&[1.0, -2.0, 1.0])]).unwrap();
        let commuting = ShapeOperatorSet::new(vec![
            SymMat::diag(&[1.0, -1.0, 0.0]),
            SymMat::diag(&[2.0, 3.0, -5.0]),
        ])
        .unwrap();
        for ops in [&one, &commuting] {
            assert_eq!(term_t1(ops), 0.0);
            assert_eq!(lemma32_gap(ops).unwrap(), 0.0);
            assert_eq!(term_t2(ops), 0.0);
            assert_eq!(lemma34_gap(ops), 0.0);
            let mut rng = sample_rng(5, 1);
            let nh = NablaH::random(3, ops.m(), &mut rng);
            assert_eq!(term_t3(ops, &nh).unwrap(), 0.0);
        }
    }

    #[test]
    fn t2_matches_naive_oracle() {
        let (b1, b2) = pauli();
        let ops = ShapeOperatorSet::new(vec![b1, b2]).unwrap();
        assert_eq!(term_t2(&ops), naive_t2(&ops));
        let mut rng = sample_rng(3, 0);
        for _ in 0..20 {
            let ops = random_ops(4, 3, &mut rng);
            let (a, b) = (term_t2(&ops), naive_t2(&ops));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn t3_matches_naive_oracle() {
        let mut rng = sample_rng(4, 0);
        for _ in 0..20 {
            let ops = random_ops(3, 3, &mut rng);
            let nh = NablaH::random(3, 3, &mut rng);
            let (a, b) = (term_t3(&ops, &nh).unwrap(), naive_t3(&ops, &nh));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert_eq!(
            term_t3(&random_ops(3, 2, &mut rng), &NablaH::zeros(3, 2)).unwrap(),
            0.0
        );
        assert!(term_t3(&random_ops(3, 2, &mut rng), &NablaH::zeros(2, 2)).is_err());
    }

    #[test]
    fn lemma33_zero_for_zero_derivative_and_quadratic_in_scaling() {
        let mut rng = sample_rng(6, 0);
        let ops = random_ops(3, 2, &mut rng);
        assert_eq!(lemma33_gap(&ops, &NablaH::zeros(3, 2)).unwrap(), 0.0);
        let nh = NablaH::random(3, 2, &mut rng);
        let g = lemma33_gap(&ops, &nh).unwrap();
        let g3 = lemma33_gap(&ops, &nh.scaled(3.0)).unwrap();
        assert!((g3 - 9.0 * g).abs() <= 1e-12 * g3.abs());
    }

    #[test]
    fn random_nabla_h_is_totally_symmetric() {
        let mut rng = sample_rng(7, 0);
        let nh = NablaH::random(4, 2, &mut rng);
        assert!(nh.codazzi_defect() < 1e-15);
    }

    #[test]
    fn lemma34_chain_is_ordered() {
        let mut rng = sample_rng(8, 0);
        for _ in 0..200 {
            let ops = random_ops(4, 3, &mut rng);
            let c = lemma34_chain(&ops);
            assert!(c.t2 <= c.middle * (1.0 + 1e-12));
            assert!(c.middle <= c.upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn simons_balance_zero_for_clifford_and_great_sphere() {
        assert_eq!(
            simons_balance(&ShapeOperatorSet::zeros(3, 2).unwrap(), 3),
            0.0
        );
        let cliff = ShapeOperatorSet::new(vec![SymMat::diag(&[1.0, -1.0])]).unwrap();
        assert_eq!(simons_balance(&cliff, 2), 0.0);
        let c = (1.0f64 / 3.0).sqrt();
        let veronese = ShapeOperatorSet::new(vec![
            SymMat::diag(&[c, -c]),
            SymMat::from_rows(&[vec![0.0, c], vec![c, 0.0]]).unwrap(),
        ])
        .unwrap();
        assert!(simons_balance(&veronese, 2).abs() < 1e-14);
    }

    #[test]
    fn thm11_bound_arithmetic() {
        assert_eq!(thm11_bound(0.0, 4), 0.0);
        assert!((thm11_bound(2.0, 2) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(thm11_bound(-1.0, 3) < 0.0);
    }

    #[test]
    fn cor13_constant_fields() {
        let n = 3;
        let samples: Vec<(f64, f64)> = vec![(0.0, 0.5), (0.0, 1.5)];
        let d = cor13_delta(&samples, n).unwrap();
        assert_eq!(d.vol, 2.0);
        assert!((d.delta - 4.0 * 9.0).abs() < 1e-12);
        assert!(d.low.unwrap().abs() < 1e-15);
        assert!((d.high.unwrap() - 0.5).abs() < 1e-15);

        let samples: Vec<(f64, f64)> = vec![(3.0, 0.5), (3.0, 1.5)];
        let d = cor13_delta(&samples, n).unwrap();
        assert!((d.delta - 4.0 * 9.0 * 4.0).abs() < 1e-12);
        assert!((d.low.unwrap() + 2.0 / 2.0).abs() < 1e-15);
        assert!(d.high.unwrap().abs() < 1e-15);

        // constant S: δ = vol²(5S² − 2nS + n²)
        let s = 1.7;
        let d = cor13_delta(&[(s, 2.0), (s, 1.0)], n).unwrap();
        let expect = 9.0 * (5.0 * s * s - 2.0 * 3.0 * s + 9.0);
        assert!((d.delta - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn cor13_errors_and_negative_delta() {
        assert!(cor13_delta(&[], 2).is_err());
        assert!(cor13_delta(&[(1.0, 0.0)], 2).is_err());
        // strongly non-constant S makes the discriminant negative
        let d = cor13_delta(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (10.0, 1.0)], 2).unwrap();
        assert!(d.delta < 0.0);
        assert!(d.low.is_none() && d.high.is_none());
    }

    #[test]
    fn cor14_threshold_values() {
        for n in 2..8 {
            assert!(cor14_threshold(n as f64, n).abs() <= 1e-14);
            assert!((cor14_threshold(0.0, n) - 1.0 / (n as f64 - 1.0)).abs() < 1e-15);
        }
        let expected = (-2.0 + (2.0 / 3.0) * 17f64.sqrt()) / 4.0;
        assert!((cor14_threshold(4.0 / 3.0, 2) - expected).abs() < 1e-15);
        assert!((expected - 0.18718).abs() < 1e-5);
    }

    #[test]
    fn key_integrand_cases() {
        let zero = ShapeOperatorSet::zeros(2, 1).unwrap();
        assert_eq!(key_integrand(&zero, 2, 0.0).unwrap(), 0.0);
        assert!(key_integrand(&zero, 2, -1.0).is_err());

        // a Clifford-type flat set with λ₁ = n: both summands vanish
        let cliff = ShapeOperatorSet::new(vec![SymMat::diag(&[1.0, -1.0])]).unwrap();
        assert!(key_integrand(&cliff, 2, 0.7).unwrap().abs() < 1e-15);

        // small non-commuting set: λ₁ < n and C = ρ⊥₀ gives a negative value
        let (b1, b2) = pauli();
        let ops = ShapeOperatorSet::new(vec![b1, b2]).unwrap().scaled(0.1);
        let c = rho_perp0(&ops);
        assert!(c > 0.0);
        assert!(key_integrand(&ops, 2, c).unwrap() < 0.0);
        // C > 0 form agrees with the expanded form
        let expanded = {
            let (s, l1, r) = (total_s(&ops), 0.02, c);
            r * (c.sqrt() - 2.0 + l1) + c.sqrt() * s * (l1 - 2.0) + 2.0 * s * r
        };
        assert!((key_integrand(&ops, 2, c).unwrap() - expanded).abs() < 1e-15);
    }

    #[test]
    fn gap_report_json_line() {
        let r = GapReport::new("ddvv", 0.25, Some(42), &[1.0, 2.0]).unwrap();
        let line = r.to_json_line();
        assert!(line.starts_with(r#"{"name":"ddvv","value":0.25,"seed":42,"inputs_digest":""#));
        let back: GapReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
        assert!(GapReport::new("x", f64::NAN, None, &[]).is_err());
    }
}
