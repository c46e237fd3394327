use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::digest_floats;
use crate::error::{Error, Result};
use crate::immersion::{normal_curvature, rho_perp_from_definition};
use crate::ineq::{
    bw_terms, ddvv_terms, lemma32_terms, lemma33_terms, lemma34_terms, ops_entries, NablaH,
};
use crate::matcore::random::{random_gen, random_ops, random_orthogonal, sample_rng};
use crate::matcore::{
    commutator, gram, gram_norm2, lambda_spectrum, rho_perp, rho_perp0, rotate_normal,
    rotate_tangent, total_s, GenMat, ShapeOperatorSet,
};

/// Gap suites pass when every normalized gap is at least `-GAP_FLOOR`.
pub const GAP_FLOOR: f64 = 1e-9;
/// Allowed relative drift of frame-independent quantities under rotations.
pub const FRAME_DRIFT_TOL: f64 = 1e-10;
/// `R⊥` against commutator entries.
pub const CURVATURE_IDENTITY_TOL: f64 = 1e-12;
/// The two `ρ⊥` formulas, relative.
pub const RHO_FORMS_TOL: f64 = 1e-10;

pub const N_RANGE: (usize, usize) = (2, 5);
pub const M_RANGE: (usize, usize) = (1, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Ddvv,
    Bw,
    Lemma32,
    Lemma33,
    Lemma34,
    FrameInvariance,
    RelIdentity,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Ddvv,
        Suite::Bw,
        Suite::Lemma32,
        Suite::Lemma33,
        Suite::Lemma34,
        Suite::FrameInvariance,
        Suite::RelIdentity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Ddvv => "ddvv",
            Suite::Bw => "bw",
            Suite::Lemma32 => "lemma32",
            Suite::Lemma33 => "lemma33",
            Suite::Lemma34 => "lemma34",
            Suite::FrameInvariance => "frame_invariance",
            Suite::RelIdentity => "rel_identity",
        }
    }

    fn checks(&self) -> Vec<(&'static str, Bound, f64)> {
        match self {
            Suite::Ddvv | Suite::Bw | Suite::Lemma32 | Suite::Lemma33 | Suite::Lemma34 => {
                vec![("min_normalized_gap", Bound::AtLeast, -GAP_FLOOR)]
            }
            Suite::FrameInvariance => vec![("max_relative_drift", Bound::AtMost, FRAME_DRIFT_TOL)],
            Suite::RelIdentity => vec![
                (
                    "max_curvature_minus_commutator",
                    Bound::AtMost,
                    CURVATURE_IDENTITY_TOL,
                ),
                (
                    "max_rho_perp_relative_difference",
                    Bound::AtMost,
                    RHO_FORMS_TOL,
                ),
            ],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCheck {
    pub name: String,
    pub bound: Bound,
    pub threshold: f64,
    /// Smallest value for `AtLeast`, largest for `AtMost`.
    pub worst: f64,
    pub worst_index: usize,
    /// Digest of the inputs of the worst sample.
    pub worst_digest: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub suite: Suite,
    pub count: usize,
    pub seed: u64,
    pub corrupted: bool,
    pub checks: Vec<SweepCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub count: usize,
    pub seed: u64,
    /// Negative control: deliberately break each measured quantity.
    pub corrupt: bool,
}

fn dims(rng: &mut ChaCha8Rng) -> (usize, usize) {
    (
        rng.gen_range(N_RANGE.0..=N_RANGE.1),
        rng.gen_range(M_RANGE.0..=M_RANGE.1),
    )
}

struct Sample {
    ops: Option<ShapeOperatorSet>,
    pair: Option<(GenMat, GenMat)>,
    nabla: Option<NablaH>,
    rotations: Option<(GenMat, GenMat)>,
}

impl Sample {
    fn inputs(&self) -> Vec<f64> {
        let mut v = Vec::new();
        if let Some(ops) = &self.ops {
            v.extend(ops_entries(ops));
        }
        if let Some((x, y)) = &self.pair {
            v.extend_from_slice(x.as_slice());
            v.extend_from_slice(y.as_slice());
        }
        if let Some(nh) = &self.nabla {
            v.extend_from_slice(nh.as_slice());
        }
        if let Some((o, q)) = &self.rotations {
            v.extend_from_slice(o.as_slice());
            v.extend_from_slice(q.as_slice());
        }
        v
    }
}

fn generate(suite: Suite, seed: u64, index: usize) -> Sample {
    let mut rng = sample_rng(seed, index as u64);
    let (n, m) = dims(&mut rng);
    let mut s = Sample {
        ops: None,
        pair: None,
        nabla: None,
        rotations: None,
    };
    match suite {
        Suite::Bw => s.pair = Some((random_gen(n, n, &mut rng), random_gen(n, n, &mut rng))),
        Suite::Lemma33 => {
            s.ops = Some(random_ops(n, m, &mut rng));
            s.nabla = Some(NablaH::random(n, m, &mut rng));
        }
        Suite::FrameInvariance => {
            s.ops = Some(random_ops(n, m, &mut rng));
            s.rotations = Some((
                random_orthogonal(m, &mut rng),
                random_orthogonal(n, &mut rng),
            ));
        }
        _ => s.ops = Some(random_ops(n, m, &mut rng)),
    }
    s
}

fn relative_drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

/// Frame-independent quantities of a shape operator set.
fn frame_invariants(ops: &ShapeOperatorSet) -> Result<Vec<f64>> {
    let mut v = vec![total_s(ops), rho_perp0(ops), gram_norm2(ops)];
    v.extend(lambda_spectrum(&gram(ops))?.values);
    v.push(ddvv_terms(ops.ops())?.gap());
    v.push(lemma32_terms(ops)?.gap());
    v.push(lemma34_terms(ops).gap());
    Ok(v)
}

fn measure(suite: Suite, s: &Sample, corrupt: bool) -> Result<Vec<f64>> {
    let sign = if corrupt { -1.0 } else { 1.0 };
    let ops = s.ops.as_ref();
    Ok(match suite {
        Suite::Ddvv => vec![sign * ddvv_terms(ops.expect("ops").ops())?.normalized()],
        Suite::Bw => {
            let (x, y) = s.pair.as_ref().expect("pair");
            vec![sign * bw_terms(x, y)?.normalized()]
        }
        Suite::Lemma32 => vec![sign * lemma32_terms(ops.expect("ops"))?.normalized()],
        Suite::Lemma33 => vec![
            sign * lemma33_terms(ops.expect("ops"), s.nabla.as_ref().expect("nabla"))?.normalized(),
        ],
        Suite::Lemma34 => vec![sign * lemma34_terms(ops.expect("ops")).normalized()],
        Suite::FrameInvariance => {
            let ops = ops.expect("ops");
            let (o, q) = s.rotations.as_ref().expect("rotations");
            let mut rotated = rotate_tangent(&rotate_normal(ops, o)?, q)?;
            if corrupt {
                rotated = ShapeOperatorSet::new(
                    rotated
                        .ops()
                        .iter()
                        .enumerate()
                        .map(|(i, a)| {
                            if i == 0 {
                                a.scaled(1.0 + 1e-6)
                            } else {
                                a.clone()
                            }
                        })
                        .collect(),
                )?;
            }
            let before = frame_invariants(ops)?;
            let after = frame_invariants(&rotated)?;
            vec![before
                .iter()
                .zip(&after)
                .map(|(a, b)| relative_drift(*a, *b))
                .fold(0.0, f64::max)]
        }
        Suite::RelIdentity => {
            let ops = ops.expect("ops");
            let r = normal_curvature(ops);
            let (n, m) = (ops.n(), ops.m());
            let mut worst = 0.0f64;
            for a in 0..m {
                for b in 0..m {
                    let (p, q) = if corrupt { (b, a) } else { (a, b) };
                    let c = commutator(ops.ops()[p].as_gen(), ops.ops()[q].as_gen())?;
                    for k in 0..n {
                        for l in 0..n {
                            worst = worst.max((r.get(a, b, k, l) - c[(k, l)]).abs());
                        }
                    }
                }
            }
            let def = rho_perp_from_definition(ops, n)?;
            let formula = rho_perp(ops, n)? * if corrupt { 2.0 } else { 1.0 };
            let rel = if formula == 0.0 && def == 0.0 {
                0.0
            } else {
                (def - formula).abs() / formula.abs().max(def.abs())
            };
            vec![worst, rel]
        }
    })
}

/// Runs one randomized property suite. Samples are independent streams of
/// one seed, so results do not depend on thread count.
pub fn sweep_with(suite: Suite, opts: &SweepOptions) -> Result<SweepSummary> {
    if opts.count == 0 {
        return Err(Error::Config("sweep count must be at least 1".into()));
    }
    let values = (0..opts.count)
        .into_par_iter()
        .map(|i| measure(suite, &generate(suite, opts.seed, i), opts.corrupt))
        .collect::<Result<Vec<_>>>()?;
    let checks = suite
        .checks()
        .into_iter()
        .enumerate()
        .map(|(c, (name, bound, threshold))| {
            let mut worst_index = 0;
            for (i, v) in values.iter().enumerate() {
                let better = match bound {
                    Bound::AtLeast => v[c] < values[worst_index][c],
                    Bound::AtMost => v[c] > values[worst_index][c],
                };
                // NaN counts as worst
                if better || (v[c].is_nan() && !values[worst_index][c].is_nan()) {
                    worst_index = i;
                }
            }
            let worst = values[worst_index][c];
            let passed = match bound {
                Bound::AtLeast => worst >= threshold,
                Bound::AtMost => worst <= threshold,
            };
            SweepCheck {
                name: name.to_string(),
                bound,
                threshold,
                worst,
                worst_index,
                worst_digest: digest_floats(&generate(suite, opts.seed, worst_index).inputs()),
                passed,
            }
        })
        .collect::<Vec<_>>();
    let passed = checks.iter().all(|c| c.passed);
    Ok(SweepSummary {
        suite,
        count: opts.count,
        seed: opts.seed,
        corrupted: opts.corrupt,
        checks,
        passed,
    })
}

pub fn sweep(suite: Suite, count: usize, seed: u64) -> Result<SweepSummary> {
    sweep_with(
        suite,
        &SweepOptions {
            count,
            seed,
            corrupt: false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_corruption_fails() {
        for suite in Suite::ALL {
            let ok = sweep(suite, 300, 42).unwrap();
            assert!(ok.passed, "{suite}: {:?}", ok.checks);
            let bad = sweep_with(
                suite,
                &SweepOptions {
                    count: 300,
                    seed: 42,
                    corrupt: true,
                },
            )
            .unwrap();
            assert!(!bad.passed, "{suite} corrupted run should fail");
        }
    }

    #[test]
    fn deterministic_and_parse() {
        let a = sweep(Suite::Lemma32, 200, 7).unwrap();
        let b = sweep(Suite::Lemma32, 200, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            "frame_invariance".parse::<Suite>().unwrap(),
            Suite::FrameInvariance
        );
        assert!("nope".parse::<Suite>().is_err());
        assert!(sweep(Suite::Ddvv, 0, 1).is_err());
    }
}
