use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::immersion::{
    minimality_residual, point_geometry, point_ops, ImmersionChart, QuadratureGrid,
};
use crate::ineq::{cor13_delta, cor14_threshold, simons_balance, thm11_bound};
use crate::matcore::{gram, lambda_spectrum, rho_perp, rho_perp0, total_s};
use crate::models::{Model, ModelSpec};

/// Max `ρ⊥` counted as a flat normal bundle.
pub const FLAT_TOL: f64 = 1e-6;
/// Tolerance on `S` and `λ₁` when matching classification tables.
pub const CLASS_TOL: f64 = 1e-4;
/// Default slack in hypothesis comparisons.
pub const HYPOTHESIS_TOL: f64 = 1e-6;
/// A field is constant when `max − min ≤ CONST_TOL · (1 + |mean|)`.
pub const CONST_TOL: f64 = 1e-6;
/// `λ_i` counts toward the first normal rank when above this multiple of `λ₁`.
pub const NORMAL_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub flat_tol: f64,
    pub class_tol: f64,
    pub hypothesis_tol: f64,
    pub const_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            flat_tol: FLAT_TOL,
            class_tol: CLASS_TOL,
            hypothesis_tol: HYPOTHESIS_TOL,
            const_tol: CONST_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    GreatSphere,
    Clifford,
    SphereProduct,
    Unclassified,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GreatSphere => "great_sphere",
            Verdict::Clifford => "clifford",
            Verdict::SphereProduct => "sphere_product",
            Verdict::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSign {
    Positive,
    Zero,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            count += 1;
        }
        // clamp so that min ≤ mean ≤ max survives rounding
        let mean = (sum / count as f64).clamp(min, max);
        Aggregate { min, max, mean }
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.max - self.min <= tol * (1.0 + self.mean.abs())
    }
}

/// Invariants at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub u: Vec<f64>,
    pub s: f64,
    pub lambda1: f64,
    pub rho_perp: f64,
    pub rho_perp0: f64,
    pub minimality_residual: f64,
    pub nabla_h2: f64,
    pub simons_balance: f64,
    pub codazzi_defect: f64,
    pub normal_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub s: Aggregate,
    pub lambda1: Aggregate,
    pub rho_perp: Aggregate,
    pub rho_perp0: Aggregate,
    pub minimality_residual: Aggregate,
    pub nabla_h2: Aggregate,
    pub simons_balance: Aggregate,
    pub codazzi_defect: Aggregate,
}

impl Aggregates {
    fn of(points: &[PointRecord]) -> Self {
        let agg = |f: fn(&PointRecord) -> f64| Aggregate::of(points.iter().map(f));
        Aggregates {
            s: agg(|p| p.s),
            lambda1: agg(|p| p.lambda1),
            rho_perp: agg(|p| p.rho_perp),
            rho_perp0: agg(|p| p.rho_perp0),
            minimality_residual: agg(|p| p.minimality_residual),
            nabla_h2: agg(|p| p.nabla_h2),
            simons_balance: agg(|p| p.simons_balance),
            codazzi_defect: agg(|p| p.codazzi_defect),
        }
    }
}

/// Integrals over the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSummary {
    pub nodes: Vec<usize>,
    pub vol: f64,
    pub int_s: f64,
    pub int_s2: f64,
    pub delta: f64,
    pub delta_low: Option<f64>,
    pub delta_high: Option<f64>,
}

/// Infima and suprema over M are taken over the sample grid; this records the
/// same means on a grid with half the points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceNote {
    pub coarse_grid: Vec<usize>,
    pub s_mean_coarse: f64,
    pub lambda1_mean_coarse: f64,
    pub rho_perp_max_coarse: f64,
    pub s_mean_change: f64,
    pub lambda1_mean_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// `inf (n − λ₁)` over the samples.
    pub inf_n_minus_lambda1: f64,
    /// `ρ⊥` bound evaluated at that infimum.
    pub rho_perp_bound: f64,
    /// `λ₁ ≤ n` and `ρ⊥ ≤ bound`.
    pub thm11_hypothesis: bool,
    /// `S ≤ n` and `ρ⊥ ≤ bound`.
    pub thm12_hypothesis: bool,
    pub cor13_delta_sign: DeltaSign,
    /// Present only when both `S` and `ρ⊥` are constant.
    pub cor14_hypothesis: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub version: String,
    pub fd_step: f64,
    pub fd_scheme: String,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchReport {
    pub model: ModelSpec,
    pub n: usize,
    pub m: usize,
    pub grid: Vec<usize>,
    pub points: Vec<PointRecord>,
    pub aggregates: Aggregates,
    pub minimal: bool,
    pub quadrature: QuadratureSummary,
    pub hypotheses: Hypotheses,
    pub first_normal_rank: usize,
    pub verdict: Verdict,
    pub corollary: CorollaryScan,
    pub convergence: ConvergenceNote,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
}

impl PinchReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A named pass/fail consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `ρ⊥` at or below the lower root.
    Low,
    /// `ρ⊥` at or above the upper root.
    High,
    /// Between the roots: would contradict the dichotomy.
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryScan {
    pub delta: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub rho_perp: f64,
    /// Which side of the discriminant roots `ρ⊥` falls on, when `δ ≥ 0` and `ρ⊥` is constant.
    pub branch: Option<Branch>,
    /// Constant-`S` threshold, when `S` is constant.
    pub threshold: Option<f64>,
    pub threshold_satisfied: Option<bool>,
    /// `"great_sphere_or_clifford"` when the threshold hypothesis holds.
    pub classification_claim: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalyzeOptions {
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    /// Points per axis for quadrature; defaults to about 4096 nodes in total.
    pub quadrature_nodes: Option<Vec<usize>>,
}

fn point_record(chart: &ImmersionChart, u: &[f64]) -> Result<PointRecord> {
    let n = chart.n();
    let pg = point_geometry(chart, u)?;
    let ops = &pg.ops;
    let spec = lambda_spectrum(&gram(ops))?;
    let l1 = spec.lambda1();
    let normal_rank = if l1 <= CLASS_TOL {
        0
    } else {
        spec.values
            .iter()
            .filter(|v| **v > NORMAL_RANK_TOL * l1)
            .count()
    };
    Ok(PointRecord {
        u: u.to_vec(),
        s: total_s(ops),
        lambda1: l1,
        rho_perp: if n >= 2 { rho_perp(ops, n)? } else { 0.0 },
        rho_perp0: rho_perp0(ops),
        minimality_residual: minimality_residual(ops),
        nabla_h2: pg.nabla_h.norm2(),
        simons_balance: simons_balance(ops, n),
        codazzi_defect: pg.codazzi_defect,
        normal_rank,
    })
}

fn classify(n: usize, agg: &Aggregates, rank: usize, minimal: bool, tol: &Tolerances) -> Verdict {
    let nf = n as f64;
    if !minimal {
        return Verdict::Unclassified;
    }
    if agg.s.max <= tol.class_tol {
        return Verdict::GreatSphere;
    }
    let flat = agg.rho_perp.max <= tol.flat_tol;
    let lambda_is_n = (agg.lambda1.min - nf).abs() <= tol.class_tol
        && (agg.lambda1.max - nf).abs() <= tol.class_tol;
    let r = rank as f64;
    let s_is_rn =
        (agg.s.min - r * nf).abs() <= tol.class_tol && (agg.s.max - r * nf).abs() <= tol.class_tol;
    match (flat && lambda_is_n && s_is_rn, rank) {
        (true, 1) => Verdict::Clifford,
        (true, r) if r >= 2 => Verdict::SphereProduct,
        _ => Verdict::Unclassified,
    }
}

fn default_quadrature_nodes(n: usize) -> Vec<usize> {
    let per = (4096f64.powf(1.0 / n as f64).floor() as usize).max(2);
    vec![per; n]
}

fn halved(grid: &[usize]) -> Vec<usize> {
    grid.iter().map(|g| (g / 2).max(1)).collect()
}

/// Samples the model's chart, aggregates invariants, evaluates the pinching
/// hypotheses and classifies the result.
pub fn analyze(model: &Model, opts: &AnalyzeOptions) -> Result<PinchReport> {
    let chart = model.chart();
    let n = chart.n();
    let nf = n as f64;
    let tol = opts.tolerances;

    let points = chart
        .sample_points()
        .par_iter()
        .map(|u| point_record(chart, u))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = Aggregates::of(&points);
    let first_normal_rank = points.iter().map(|p| p.normal_rank).max().unwrap_or(0);

    let minimal = points
        .iter()
        .all(|p| p.minimality_residual <= 1e-6 * (1.0 + p.s.sqrt()));

    let nodes = opts
        .quadrature_nodes
        .clone()
        .unwrap_or_else(|| default_quadrature_nodes(n));
    let quad = QuadratureGrid::new(chart, &nodes)?;
    let s_nodes = quad
        .nodes
        .par_iter()
        .map(|u| Ok(total_s(&point_ops(chart, u)?.1)))
        .collect::<Result<Vec<f64>>>()?;
    let vol = quad.volume();
    let int_s = quad.integrate_values(&s_nodes)?;
    let s2: Vec<f64> = s_nodes.iter().map(|s| s * s).collect();
    let int_s2 = quad.integrate_values(&s2)?;
    let samples: Vec<(f64, f64)> = s_nodes
        .iter()
        .copied()
        .zip(quad.weights.iter().copied())
        .collect();
    let delta = cor13_delta(&samples, n)?;
    let quadrature = QuadratureSummary {
        nodes,
        vol,
        int_s,
        int_s2,
        delta: delta.delta,
        delta_low: delta.low,
        delta_high: delta.high,
    };

    let inf_gap = nf - aggregates.lambda1.max;
    let bound = thm11_bound(inf_gap, n);
    let rho_ok = aggregates.rho_perp.max <= bound + tol.hypothesis_tol;
    let delta_scale = (nf * vol).powi(2) * 1e-9;
    let cor13_delta_sign = if delta.delta > delta_scale {
        DeltaSign::Positive
    } else if delta.delta < -delta_scale {
        DeltaSign::Negative
    } else {
        DeltaSign::Zero
    };
    let s_const = aggregates.s.is_constant(tol.const_tol);
    let rho_const = aggregates.rho_perp.is_constant(tol.const_tol);
    let cor14_hypothesis = (s_const && rho_const).then(|| {
        aggregates.rho_perp.max <= cor14_threshold(aggregates.s.mean, n) + tol.hypothesis_tol
    });
    let hypotheses = Hypotheses {
        inf_n_minus_lambda1: inf_gap,
        rho_perp_bound: bound,
        thm11_hypothesis: aggregates.lambda1.max <= nf + tol.hypothesis_tol && rho_ok,
        thm12_hypothesis: aggregates.s.max <= nf + tol.hypothesis_tol && rho_ok,
        cor13_delta_sign,
        cor14_hypothesis,
    };

    let verdict = classify(n, &aggregates, first_normal_rank, minimal, &tol);

    let coarse_grid = halved(chart.grid());
    let coarse = chart
        .tensor_points(&coarse_grid)
        .par_iter()
        .map(|u| {
            let ops = point_ops(chart, u)?.1;
            let l1 = lambda_spectrum(&gram(&ops))?.lambda1();
            let rp = if n >= 2 { rho_perp(&ops, n)? } else { 0.0 };
            Ok((total_s(&ops), l1, rp))
        })
        .collect::<Result<Vec<_>>>()?;
    let s_mean_coarse = Aggregate::of(coarse.iter().map(|c| c.0)).mean;
    let lambda1_mean_coarse = Aggregate::of(coarse.iter().map(|c| c.1)).mean;
    let convergence = ConvergenceNote {
        coarse_grid,
        s_mean_coarse,
        lambda1_mean_coarse,
        rho_perp_max_coarse: coarse.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max),
        s_mean_change: aggregates.s.mean - s_mean_coarse,
        lambda1_mean_change: aggregates.lambda1.mean - lambda1_mean_coarse,
    };

    let fd = chart.fd();
    let mut report = PinchReport {
        model: model.spec.clone(),
        n,
        m: chart.m(),
        grid: chart.grid().to_vec(),
        points,
        aggregates,
        minimal,
        quadrature,
        hypotheses,
        first_normal_rank,
        verdict,
        corollary: CorollaryScan {
            delta: 0.0,
            low: None,
            high: None,
            rho_perp: 0.0,
            branch: None,
            threshold: None,
            threshold_satisfied: None,
            classification_claim: None,
        },
        convergence,
        checks: Vec::new(),
        provenance: Provenance {
            seed: opts.seed,
            tolerances: tol,
            version: env!("CARGO_PKG_VERSION").to_string(),
            fd_step: fd.step,
            fd_scheme: format!("{:?}", fd.scheme).to_lowercase(),
            margin: chart.margin(),
        },
    };
    report.corollary = corollary_scan(&report);
    report.checks = consistency_checks(&report);
    Ok(report)
}

/// Discriminant branch and constant-`S` threshold decisions.
pub fn corollary_scan(report: &PinchReport) -> CorollaryScan {
    let tol = report.provenance.tolerances;
    let agg = &report.aggregates;
    let q = &report.quadrature;
    let rho = agg.rho_perp.max;
    let rho_const = agg.rho_perp.is_constant(tol.const_tol);
    let branch = match (q.delta_low, q.delta_high, rho_const) {
        (Some(lo), Some(hi), true) => Some(if rho <= lo + tol.hypothesis_tol {
            Branch::Low
        } else if rho >= hi - tol.hypothesis_tol {
            Branch::High
        } else {
            Branch::Neither
        }),
        _ => None,
    };
    let threshold = agg
        .s
        .is_constant(tol.const_tol)
        .then(|| cor14_threshold(agg.s.mean, report.n));
    let threshold_satisfied = threshold
        .filter(|_| rho_const)
        .map(|t| rho <= t + tol.hypothesis_tol);
    let classification_claim =
        (threshold_satisfied == Some(true)).then(|| "great_sphere_or_clifford".to_string());
    CorollaryScan {
        delta: q.delta,
        low: q.delta_low,
        high: q.delta_high,
        rho_perp: rho,
        branch,
        threshold,
        threshold_satisfied,
        classification_claim,
    }
}

fn consistency_checks(r: &PinchReport) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        out.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };
    let a = &r.aggregates;
    let ordered = [
        a.s,
        a.lambda1,
        a.rho_perp,
        a.rho_perp0,
        a.minimality_residual,
        a.nabla_h2,
    ]
    .iter()
    .all(|g| g.min <= g.mean && g.mean <= g.max);
    push(
        "aggregate_order",
        ordered,
        "min <= mean <= max for every field".into(),
    );
    if !r.minimal {
        push(
            "minimal",
            true,
            "chart is not minimal; pinching conclusions do not apply".into(),
        );
        return out;
    }
    let v = r.verdict;
    let h = &r.hypotheses;
    if h.thm11_hypothesis {
        push(
            "lambda1_pinching_conclusion",
            matches!(
                v,
                Verdict::GreatSphere | Verdict::Clifford | Verdict::SphereProduct
            ),
            format!("hypothesis holds, verdict {}", v.as_str()),
        );
    }
    if h.thm12_hypothesis {
        push(
            "s_pinching_conclusion",
            matches!(v, Verdict::GreatSphere | Verdict::Clifford),
            format!("hypothesis holds, verdict {}", v.as_str()),
        );
    }
    if let Some(b) = r.corollary.branch {
        push(
            "discriminant_dichotomy",
            b != Branch::Neither,
            format!("rho_perp on branch {b:?}"),
        );
    }
    if r.corollary.classification_claim.is_some() {
        push(
            "constant_s_classification",
            matches!(v, Verdict::GreatSphere | Verdict::Clifford),
            format!("threshold holds, verdict {}", v.as_str()),
        );
    }
    let nf = r.n as f64;
    let simons_ok = r
        .points
        .iter()
        .all(|p| p.simons_balance.abs() <= 1e-6 * (nf * p.s).max(1.0));
    let parallel = a.nabla_h2.max <= 1e-4;
    // the balance is forced only when ∇h vanishes
    if parallel {
        push(
            "simons_balance",
            simons_ok,
            format!(
                "max |balance| {:e}",
                a.simons_balance.max.abs().max(a.simons_balance.min.abs())
            ),
        );
    }
    let trace_ok = r
        .points
        .iter()
        .all(|p| p.minimality_residual <= 1e-6 * (1.0 + p.s.sqrt()));
    push(
        "minimality",
        trace_ok,
        format!("max trace {:e}", a.minimality_residual.max),
    );
    out
}
