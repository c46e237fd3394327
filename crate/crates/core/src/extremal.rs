//! Sharpness probes: random-restart projected gradient ascent on the
//! scale-invariant ratios
//!
//! * DDVV: `Σ_{r,s}‖[B_r,B_s]‖² / (Σ_r‖B_r‖²)²`, supremum 1 over symmetric tuples;
//! * Böttcher–Wenzel: `‖[X,Y]‖² / (‖X‖²‖Y‖²)`, supremum 2 over real pairs.
//!
//! Iterates live on the normalization sphere(s); a step is accepted only when
//! the ratio increases, otherwise the step shrinks. Restarts run in parallel
//! and are reduced in restart order, so a config reproduces bit-identical
//! results.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::FloatDigest;
use crate::error::{Error, Result};
use crate::matcore::random::{random_gen, random_sym, sample_rng};
use crate::matcore::{commutator, frob_inner, GenMat};

/// Stationary points get at most this many random kicks per restart.
const MAX_KICKS: usize = 3;
const KICK_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Ddvv,
    Bw,
}

impl Functional {
    /// Supremum of the ratio.
    pub fn bound(self) -> f64 {
        match self {
            Functional::Ddvv => 1.0,
            Functional::Bw => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step0: f64,
    pub shrink: f64,
    pub tol: f64,
    pub seed: u64,
    /// Matrix dimension.
    pub n: usize,
    /// Number of matrices (DDVV only; BW always uses a pair).
    pub m: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 32,
            max_iters: 2000,
            step0: 0.5,
            shrink: 0.5,
            tol: 1e-9,
            seed: 42,
            n: 2,
            m: 2,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.restarts < 1 {
            return fail("restarts must be >= 1".into());
        }
        if !(self.step0 > 0.0) {
            return fail(format!("step0 must be positive, got {}", self.step0));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return fail(format!("shrink must lie in (0,1), got {}", self.shrink));
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if self.n < 1 || self.m < 1 {
            return fail(format!(
                "need n >= 1 and m >= 1, got n={} m={}",
                self.n, self.m
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub functional: Functional,
    pub best_ratio: f64,
    /// Row-major rows of each maximizing matrix.
    pub best_matrices: Vec<Vec<Vec<f64>>>,
    pub best_restart: usize,
    pub iterations_used: usize,
    pub seed: u64,
    pub digest: String,
}

/// Accepted-iterate history of a single ascent run.
#[derive(Debug, Clone)]
pub struct AscentTrace {
    pub point: Vec<GenMat>,
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub kicks: usize,
}

impl AscentTrace {
    pub fn best_ratio(&self) -> f64 {
        *self.ratios.last().expect("at least the start ratio")
    }
}

fn norm2_all(xs: &[GenMat]) -> f64 {
    xs.iter().map(GenMat::frob_norm2).sum()
}

/// `(numerator, denominator)` of the ratio.
fn ratio_parts(f: Functional, xs: &[GenMat]) -> (f64, f64) {
    match f {
        Functional::Ddvv => {
            let mut num = 0.0;
            for r in 0..xs.len() {
                for s in (r + 1)..xs.len() {
                    num += 2.0 * commutator(&xs[r], &xs[s]).expect("same dims").frob_norm2();
                }
            }
            let p = norm2_all(xs);
            (num, p * p)
        }
        Functional::Bw => {
            let c = commutator(&xs[0], &xs[1]).expect("same dims");
            (c.frob_norm2(), xs[0].frob_norm2() * xs[1].frob_norm2())
        }
    }
}

pub fn ratio(f: Functional, xs: &[GenMat]) -> Result<f64> {
    check_point(f, xs)?;
    let (num, den) = ratio_parts(f, xs);
    if den == 0.0 {
        return Err(Error::Domain("ratio denominator vanishes".into()));
    }
    Ok(num / den)
}

fn check_point(f: Functional, xs: &[GenMat]) -> Result<()> {
    let Some(first) = xs.first() else {
        return Err(Error::Shape("empty point".into()));
    };
    if xs
        .iter()
        .any(|x| !x.is_square() || x.rows() != first.rows())
    {
        return Err(Error::Shape(
            "all matrices must be square of one dimension".into(),
        ));
    }
    if f == Functional::Bw && xs.len() != 2 {
        return Err(Error::Shape(format!(
            "BW ratio takes a pair, got {} matrices",
            xs.len()
        )));
    }
    Ok(())
}

/// Analytic gradient of the ratio.
///
/// DDVV (symmetric `B_r`, `P = Σ‖B‖²`, `N` the commutator sum):
/// `∇_r N = 4 Σ_s [[B_r,B_s],B_s]`, `∇_r P² = 4 P B_r`.
/// BW with `C = [X,Y]`: `∇_X ‖C‖² = 2(C Yᵀ − Yᵀ C)`, `∇_Y ‖C‖² = 2(Xᵀ C − C Xᵀ)`.
pub fn ratio_gradient(f: Functional, xs: &[GenMat]) -> Result<Vec<GenMat>> {
    check_point(f, xs)?;
    let (num, den) = ratio_parts(f, xs);
    if den == 0.0 {
        return Err(Error::Domain("ratio denominator vanishes".into()));
    }
    let grads = match f {
        Functional::Ddvv => {
            let p = norm2_all(xs);
            (0..xs.len())
                .map(|r| {
                    let mut g = GenMat::zeros(xs[r].rows(), xs[r].cols());
                    for s in 0..xs.len() {
                        if s == r {
                            continue;
                        }
                        let c = commutator(&xs[r], &xs[s]).expect("same dims");
                        let term = commutator(&c, &xs[s]).expect("same dims");
                        g = g.add_scaled(&term, 4.0).expect("same dims");
                    }
                    // quotient rule: (∇N · D − N · ∇D) / D²
                    g.scaled(1.0 / den)
                        .add_scaled(&xs[r], -num * 4.0 * p / (den * den))
                        .expect("same dims")
                })
                .collect()
        }
        Functional::Bw => {
            let (x, y) = (&xs[0], &xs[1]);
            let c = commutator(x, y).expect("same dims");
            let (yt, xt) = (y.transpose(), x.transpose());
            let gx = c.matmul(&yt)?.sub(&yt.matmul(&c)?)?.scaled(2.0);
            let gy = xt.matmul(&c)?.sub(&c.matmul(&xt)?)?.scaled(2.0);
            let (nx, ny) = (x.frob_norm2(), y.frob_norm2());
            vec![
                gx.scaled(1.0 / den)
                    .add_scaled(x, -num * 2.0 * ny / (den * den))?,
                gy.scaled(1.0 / den)
                    .add_scaled(y, -num * 2.0 * nx / (den * den))?,
            ]
        }
    };
    Ok(grads)
}

/// Projects onto the normalization constraint: `Σ‖B_r‖² = 1` for DDVV,
/// `‖X‖ = ‖Y‖ = 1` for BW.
fn normalize(f: Functional, xs: &mut [GenMat]) {
    match f {
        Functional::Ddvv => {
            let s = norm2_all(xs).sqrt();
            for x in xs.iter_mut() {
                *x = x.scaled(1.0 / s);
            }
        }
        Functional::Bw => {
            for x in xs.iter_mut() {
                *x = x.scaled(1.0 / x.frob_norm());
            }
        }
    }
}

fn random_start<R: Rng + ?Sized>(f: Functional, cfg: &SearchConfig, rng: &mut R) -> Vec<GenMat> {
    match f {
        Functional::Ddvv => (0..cfg.m)
            .map(|_| random_sym(cfg.n, rng).into_gen())
            .collect(),
        Functional::Bw => (0..2).map(|_| random_gen(cfg.n, cfg.n, rng)).collect(),
    }
}

fn perturbed<R: Rng + ?Sized>(
    f: Functional,
    xs: &[GenMat],
    scale: f64,
    rng: &mut R,
) -> Vec<GenMat> {
    xs.iter()
        .map(|x| {
            let noise = match f {
                Functional::Ddvv => random_sym(x.rows(), rng).into_gen(),
                Functional::Bw => random_gen(x.rows(), x.cols(), rng),
            };
            x.add_scaled(&noise, scale).expect("same dims")
        })
        .collect()
}

/// One ascent run from `start`. Accepted ratios are nondecreasing.
pub fn ascend_from<R: Rng + ?Sized>(
    f: Functional,
    start: Vec<GenMat>,
    cfg: &SearchConfig,
    rng: &mut R,
) -> Result<AscentTrace> {
    check_point(f, &start)?;
    let mut x = start;
    normalize(f, &mut x);
    let mut current = ratio(f, &x)?;
    let mut ratios = vec![current];
    let mut step = cfg.step0;
    let mut iterations = 0;
    let mut kicks = 0;

    while iterations < cfg.max_iters && step >= cfg.tol * cfg.step0 {
        iterations += 1;
        let grad = ratio_gradient(f, &x)?;
        let gnorm = norm2_all(&grad).sqrt();
        if gnorm < cfg.tol {
            // stationary: try a small random kick, keep it only if it does not lose ground
            if kicks == MAX_KICKS {
                break;
            }
            kicks += 1;
            let mut y = perturbed(f, &x, KICK_SCALE, rng);
            normalize(f, &mut y);
            let r = ratio(f, &y)?;
            if r >= current {
                x = y;
                current = r;
                ratios.push(current);
            }
            continue;
        }
        let mut y: Vec<GenMat> = x
            .iter()
            .zip(&grad)
            .map(|(a, g)| a.add_scaled(g, step).expect("same dims"))
            .collect();
        normalize(f, &mut y);
        let r = ratio(f, &y)?;
        if r > current {
            x = y;
            current = r;
            ratios.push(current);
        } else {
            step *= cfg.shrink;
        }
    }
    Ok(AscentTrace {
        point: x,
        ratios,
        iterations,
        kicks,
    })
}

fn search(f: Functional, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if f == Functional::Ddvv && (cfg.n < 2 || cfg.m < 1) {
        return Err(Error::Config("DDVV search needs n >= 2".into()));
    }
    if f == Functional::Bw && cfg.n < 2 {
        return Err(Error::Config("BW search needs n >= 2".into()));
    }
    let traces = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = sample_rng(cfg.seed, restart as u64);
            let start = random_start(f, cfg, &mut rng);
            ascend_from(f, start, cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    // first restart wins ties
    let mut best = 0;
    for (i, t) in traces.iter().enumerate() {
        if t.best_ratio() > traces[best].best_ratio() {
            best = i;
        }
    }
    let winner = &traces[best];
    let mut d = FloatDigest::new();
    d.push(winner.best_ratio());
    for x in &winner.point {
        d.push_all(x.as_slice());
    }
    Ok(SearchResult {
        functional: f,
        best_ratio: winner.best_ratio(),
        best_matrices: winner.point.iter().map(GenMat::to_rows).collect(),
        best_restart: best,
        iterations_used: traces.iter().map(|t| t.iterations).sum(),
        seed: cfg.seed,
        digest: d.finish(),
    })
}

pub fn maximize_ddvv_ratio(cfg: &SearchConfig) -> Result<SearchResult> {
    search(Functional::Ddvv, cfg)
}

pub fn maximize_bw_ratio(cfg: &SearchConfig) -> Result<SearchResult> {
    search(Functional::Bw, cfg)
}

/// Coordinate directions of the search space: symmetric unit perturbations
/// for DDVV, single entries for BW.
fn directions(f: Functional, xs: &[GenMat]) -> Vec<(usize, GenMat)> {
    let mut out = Vec::new();
    for (idx, x) in xs.iter().enumerate() {
        let n = x.rows();
        for i in 0..n {
            let js = match f {
                Functional::Ddvv => i..n,
                Functional::Bw => 0..n,
            };
            for j in js {
                let mut e = GenMat::zeros(n, n);
                e[(i, j)] = 1.0;
                if f == Functional::Ddvv {
                    e[(j, i)] = 1.0;
                }
                out.push((idx, e));
            }
        }
    }
    out
}

/// Largest discrepancy between the analytic ratio gradient and central
/// differences (step `1e-6·‖point‖`), relative to `max(‖∇‖∞, 1/‖point‖)`.
pub fn gradient_check(point: &[GenMat], f: Functional) -> Result<f64> {
    let grad = ratio_gradient(f, point)?;
    let scale = norm2_all(point).sqrt();
    let h = 1e-6 * scale;
    let mut worst_abs = 0.0f64;
    let mut gmax = 0.0f64;
    for (idx, e) in directions(f, point) {
        let analytic = frob_inner(&grad[idx], &e)?;
        let shifted = |t: f64| -> Result<f64> {
            let mut p = point.to_vec();
            p[idx] = p[idx].add_scaled(&e, t)?;
            ratio(f, &p)
        };
        let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h);
        worst_abs = worst_abs.max((analytic - fd).abs());
        gmax = gmax.max(analytic.abs());
    }
    Ok(worst_abs / gmax.max(1.0 / scale))
}
