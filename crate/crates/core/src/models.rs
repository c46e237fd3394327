//! Exact minimal submanifolds of spheres with both a chart and closed-form
//! shape operators, plus one non-minimal control.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersion::{minimality_residual, point_ops, Axis, ChartMap, FdConfig, ImmersionChart};
use crate::matcore::{
    gram, jacobi_eigen, lambda_spectrum, rho_perp, rho_perp0, total_s, GenMat, ShapeOperatorSet,
    SymMat,
};

/// Radius of the small circle in the non-minimal control torus.
pub const CONTROL_RADIUS: f64 = 0.5;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the classification literature.
    Literature,
    /// Obtained by computation from other stated values.
    Derived,
    /// Forced by definitions.
    Trivial,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Literature => "literature",
            Provenance::Derived => "derived",
            Provenance::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedValue {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
}

fn expect(name: &str, value: f64, provenance: Provenance) -> ExpectedValue {
    ExpectedValue {
        name: name.to_string(),
        value,
        provenance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GreatSphere,
    Clifford,
    SphereProduct,
    Veronese,
    NonMinimalTorus,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::GreatSphere => "great_sphere",
            ModelKind::Clifford => "clifford",
            ModelKind::SphereProduct => "sphere_product",
            ModelKind::Veronese => "veronese",
            ModelKind::NonMinimalTorus => "nonminimal_torus",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "great_sphere" => ModelKind::GreatSphere,
            "clifford" => ModelKind::Clifford,
            "sphere_product" => ModelKind::SphereProduct,
            "veronese" => ModelKind::Veronese,
            "nonminimal_torus" => ModelKind::NonMinimalTorus,
            other => return Err(Error::Config(format!("unknown model {other:?}"))),
        })
    }
}

/// Constructor parameters; which fields apply depends on the model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub id: String,
    pub params: ModelParams,
    pub n: usize,
    pub m: usize,
    pub expected: Vec<ExpectedValue>,
}

impl ModelSpec {
    pub fn expected(&self, name: &str) -> Option<f64> {
        self.expected
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.value)
    }
}

/// `G_ij = (n/n_i) δ_ij − 1` and a factor `W` (k × (k−1)) with `W Wᵀ = G`.
#[derive(Debug, Clone)]
pub struct SimplexGram {
    pub partition: Vec<usize>,
    pub n: usize,
    pub g: SymMat,
    pub w: GenMat,
}

impl SimplexGram {
    pub fn new(partition: &[usize]) -> Result<Self> {
        validate_partition(partition)?;
        let k = partition.len();
        let n: usize = partition.iter().sum();
        let mut g = SymMat::zeros(k);
        for i in 0..k {
            for j in 0..=i {
                let d = if i == j {
                    n as f64 / partition[i] as f64
                } else {
                    0.0
                };
                g.set(i, j, d - 1.0);
            }
        }
        let eig = jacobi_eigen(&g)?;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|a, b| eig.values[*b].total_cmp(&eig.values[*a]));
        // the smallest eigenvalue belongs to the null vector (n_1, …, n_k)
        let mut w = GenMat::zeros(k, k - 1);
        for (col, &idx) in order.iter().take(k - 1).enumerate() {
            let scale = eig.values[idx].max(0.0).sqrt();
            for i in 0..k {
                w[(i, col)] = eig.vectors[(i, idx)] * scale;
            }
        }
        Ok(SimplexGram {
            partition: partition.to_vec(),
            n,
            g,
            w,
        })
    }

    pub fn k(&self) -> usize {
        self.partition.len()
    }

    /// Largest violation among `W Wᵀ = G`, `G · (n_i) = 0` and `Σ_i n_i W_iα = 0`.
    pub fn relations_defect(&self) -> f64 {
        let k = self.k();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let wwt: f64 = (0..k - 1).map(|a| self.w[(i, a)] * self.w[(j, a)]).sum();
                worst = worst.max((wwt - self.g.get(i, j)).abs());
            }
            let gn: f64 = (0..k)
                .map(|j| self.g.get(i, j) * self.partition[j] as f64)
                .sum();
            worst = worst.max(gn.abs());
        }
        for a in 0..k - 1 {
            let s: f64 = (0..k)
                .map(|i| self.partition[i] as f64 * self.w[(i, a)])
                .sum();
            worst = worst.max(s.abs());
        }
        worst
    }

    /// Diagonal operators with block-constant entries `λ_i^α = W_iα`.
    pub fn shape_operators(&self) -> Result<ShapeOperatorSet> {
        let ops = (0..self.k() - 1)
            .map(|a| {
                let diag: Vec<f64> = self
                    .partition
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &ni)| std::iter::repeat_n(self.w[(i, a)], ni))
                    .collect();
                SymMat::diag(&diag)
            })
            .collect();
        ShapeOperatorSet::new(ops)
    }
}

fn validate_partition(partition: &[usize]) -> Result<()> {
    if partition.len() < 2 {
        return Err(Error::Model(format!(
            "a sphere product needs at least two factors, got {partition:?}"
        )));
    }
    if partition.contains(&0) {
        return Err(Error::Model(format!(
            "partition entries must be positive, got {partition:?}"
        )));
    }
    Ok(())
}

/// Unit sphere `𝕊ᵈ ⊂ ℝᵈ⁺¹` in iterated spherical coordinates.
fn unit_sphere_point(angles: &[f64], out: &mut Vec<f64>) {
    let mut prefix = 1.0;
    for a in angles {
        out.push(prefix * a.cos());
        prefix *= a.sin();
    }
    out.push(prefix);
}

/// `Π 𝕊^{d_i}(r_i)` with `Σ r_i² = 1`, followed by `pad` zero coordinates.
#[derive(Debug, Clone)]
pub struct SphereProductMap {
    factors: Vec<(usize, f64)>,
    pad: usize,
}

impl SphereProductMap {
    pub fn new(factors: Vec<(usize, f64)>, pad: usize) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|(d, r)| *d == 0 || !(*r > 0.0)) {
            return Err(Error::Model(format!("invalid sphere factors {factors:?}")));
        }
        let r2: f64 = factors.iter().map(|(_, r)| r * r).sum();
        if (r2 - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("squared radii sum to {r2}, not 1")));
        }
        Ok(SphereProductMap { factors, pad })
    }

    /// Angles in `[0, π]` except the last angle of each factor, which is periodic.
    pub fn axes(&self) -> Vec<Axis> {
        self.factors
            .iter()
            .flat_map(|(d, _)| {
                (0..*d).map(move |j| {
                    if j + 1 == *d {
                        Axis::periodic(0.0, 2.0 * PI)
                    } else {
                        Axis::bounded(0.0, PI)
                    }
                })
            })
            .collect()
    }

    /// Factor index of each tangent direction.
    pub fn blocks(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(i, (d, _))| std::iter::repeat_n(i, *d))
            .collect()
    }
}

impl ChartMap for SphereProductMap {
    fn dim(&self) -> usize {
        self.factors.iter().map(|(d, _)| d).sum()
    }

    fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|(d, _)| d + 1).sum::<usize>() + self.pad
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ambient_dim());
        let mut offset = 0;
        for (d, r) in &self.factors {
            let start = out.len();
            unit_sphere_point(&u[offset..offset + d], &mut out);
            out[start..].iter_mut().for_each(|x| *x *= r);
            offset += d;
        }
        out.resize(out.len() + self.pad, 0.0);
        out
    }
}

/// Quadratic map of the unit 2-sphere into `𝕊⁴`, in polar coordinates on the
/// upper hemisphere (one sheet of the projective plane).
#[derive(Debug, Clone, Copy)]
pub struct VeroneseMap;

impl VeroneseMap {
    pub fn axes() -> Vec<Axis> {
        vec![Axis::bounded(0.0, PI / 2.0), Axis::periodic(0.0, 2.0 * PI)]
    }

    pub fn from_unit_vector(x: f64, y: f64, z: f64) -> Vec<f64> {
        let s3 = 3f64.sqrt();
        vec![
            s3 * y * z,
            s3 * x * z,
            s3 * x * y,
            0.5 * s3 * (x * x - y * y),
            0.5 * (x * x + y * y - 2.0 * z * z),
        ]
    }
}

impl ChartMap for VeroneseMap {
    fn dim(&self) -> usize {
        2
    }

    fn ambient_dim(&self) -> usize {
        5
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        Self::from_unit_vector(st * cp, st * sp, ct)
    }
}

/// A registered model: spec, chart and closed-form shape operators.
#[derive(Clone)]
pub struct Model {
    pub spec: ModelSpec,
    chart: ImmersionChart,
    ops: ShapeOperatorSet,
    blocks: Option<Vec<usize>>,
    block_curvature: Vec<f64>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("spec", &self.spec)
            .field("chart", &self.chart)
            .finish()
    }
}

/// Per-axis sample count keeping the default grid near 100 points.
fn default_grid(n: usize) -> Vec<usize> {
    let per = (100f64.powf(1.0 / n as f64).floor() as usize).max(2);
    vec![per; n]
}

impl Model {
    fn assemble(
        spec: ModelSpec,
        map: Arc<dyn ChartMap>,
        axes: Vec<Axis>,
        ops: ShapeOperatorSet,
        blocks: Option<Vec<usize>>,
        block_curvature: Vec<f64>,
    ) -> Result<Self> {
        let n = map.dim();
        let chart = ImmersionChart::new(map, axes)?.with_grid(default_grid(n))?;
        chart.validate_sphere()?;
        Ok(Model {
            spec,
            chart,
            ops,
            blocks,
            block_curvature,
        })
    }

    pub fn chart(&self) -> &ImmersionChart {
        &self.chart
    }

    /// Closed-form shape operators at a point, in a frame adapted to the model.
    pub fn algebraic_ops(&self) -> &ShapeOperatorSet {
        &self.ops
    }

    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    /// Sphere-factor index of each chart tangent direction, for product models.
    pub fn blocks(&self) -> Option<&[usize]> {
        self.blocks.as_deref()
    }

    /// Expected sectional curvature of the plane spanned by frame directions
    /// `i`, `j` of the chart's Gram–Schmidt frame.
    pub fn expected_sectional(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return None;
        }
        match (&self.blocks, self.spec.kind) {
            (_, ModelKind::Veronese) => Some(1.0 / 3.0),
            (Some(b), _) => Some(if b[i] == b[j] {
                self.block_curvature[b[i]]
            } else {
                0.0
            }),
            (None, _) => None,
        }
    }

    pub fn with_grid(mut self, grid: Vec<usize>) -> Result<Self> {
        self.chart = self.chart.with_grid(grid)?;
        Ok(self)
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Result<Self> {
        self.chart = self.chart.with_fd(fd)?;
        Ok(self)
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        self.chart = self.chart.with_margin(margin)?;
        Ok(self)
    }

    pub fn from_name(name: &str, params: &ModelParams) -> Result<Self> {
        let need = |v: Option<usize>, field: &str| {
            v.ok_or_else(|| Error::Config(format!("model {name} needs parameter {field:?}")))
        };
        match ModelKind::parse(name)? {
            ModelKind::GreatSphere => great_sphere(need(params.n, "n")?, need(params.m, "m")?),
            ModelKind::Clifford => clifford(need(params.k, "k")?, need(params.n, "n")?),
            ModelKind::SphereProduct => match &params.partition {
                Some(p) => sphere_product(p),
                None => Err(Error::Config(
                    "model sphere_product needs parameter \"partition\"".into(),
                )),
            },
            ModelKind::Veronese => veronese(),
            ModelKind::NonMinimalTorus => nonminimal_torus(params.radius.unwrap_or(CONTROL_RADIUS)),
        }
    }
}

fn invariants_table(
    ops: &ShapeOperatorSet,
    n: usize,
    prov: [Provenance; 4],
) -> Result<Vec<ExpectedValue>> {
    let spec = lambda_spectrum(&gram(ops))?;
    let l1 = spec.lambda1();
    let rank = spec
        .values
        .iter()
        .filter(|v| **v > 1e-8 * l1.max(f64::MIN_POSITIVE))
        .count();
    Ok(vec![
        expect("S", total_s(ops), prov[0]),
        expect("lambda1", l1, prov[1]),
        expect(
            "rho_perp",
            if n >= 2 { rho_perp(ops, n)? } else { 0.0 },
            prov[2],
        ),
        expect("rho_perp0", rho_perp0(ops), prov[2]),
        expect("normal_rank", rank as f64, prov[3]),
    ])
}

/// Equatorial `𝕊ⁿ ⊂ 𝕊ⁿ⁺ᵐ`.
pub fn great_sphere(n: usize, m: usize) -> Result<Model> {
    if n == 0 || m == 0 {
        return Err(Error::Model(format!(
            "great_sphere needs n >= 1 and m >= 1, got ({n}, {m})"
        )));
    }
    let map = SphereProductMap::new(vec![(n, 1.0)], m)?;
    let axes = map.axes();
    let ops = ShapeOperatorSet::zeros(n, m)?;
    use Provenance::*;
    let spec = ModelSpec {
        kind: ModelKind::GreatSphere,
        id: format!("great_sphere(n={n},m={m})"),
        params: ModelParams {
            n: Some(n),
            m: Some(m),
            ..Default::default()
        },
        n,
        m,
        expected: invariants_table(&ops, n, [Literature, Trivial, Trivial, Trivial])?,
    };
    Model::assemble(spec, Arc::new(map), axes, ops, Some(vec![0; n]), vec![1.0])
}

/// Clifford torus `𝕊ᵏ(√(k/n)) × 𝕊ⁿ⁻ᵏ(√((n−k)/n)) ⊂ 𝕊ⁿ⁺¹`.
pub fn clifford(k: usize, n: usize) -> Result<Model> {
    if k == 0 || k >= n {
        return Err(Error::Model(format!(
            "clifford needs 1 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let (kf, nf) = (k as f64, n as f64);
    let map = SphereProductMap::new(
        vec![(k, (kf / nf).sqrt()), (n - k, ((nf - kf) / nf).sqrt())],
        0,
    )?;
    let axes = map.axes();
    let blocks = map.blocks();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            if i < k {
                ((nf - kf) / kf).sqrt()
            } else {
                -(kf / (nf - kf)).sqrt()
            }
        })
        .collect();
    let ops = ShapeOperatorSet::new(vec![SymMat::diag(&diag)])?;
    use Provenance::*;
    let spec = ModelSpec {
        kind: ModelKind::Clifford,
        id: format!("clifford(k={k},n={n})"),
        params: ModelParams {
            n: Some(n),
            k: Some(k),
            ..Default::default()
        },
        n,
        m: 1,
        expected: invariants_table(&ops, n, [Literature, Derived, Literature, Derived])?,
    };
    Model::assemble(
        spec,
        Arc::new(map),
        axes,
        ops,
        Some(blocks),
        vec![nf / kf, nf / (nf - kf)],
    )
}

/// Minimal product `Π 𝕊^{n_i}(√(n_i/n)) ⊂ 𝕊^{n+k−1}`.
pub fn sphere_product(partition: &[usize]) -> Result<Model> {
    let sg = SimplexGram::new(partition)?;
    let n = sg.n;
    let nf = n as f64;
    let map = SphereProductMap::new(
        partition
            .iter()
            .map(|&ni| (ni, (ni as f64 / nf).sqrt()))
            .collect(),
        0,
    )?;
    let axes = map.axes();
    let blocks = map.blocks();
    let ops = sg.shape_operators()?;
    use Provenance::*;
    let spec = ModelSpec {
        kind: ModelKind::SphereProduct,
        id: format!(
            "sphere_product({})",
            partition
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
        params: ModelParams {
            partition: Some(partition.to_vec()),
            ..Default::default()
        },
        n,
        m: partition.len() - 1,
        expected: invariants_table(&ops, n, [Literature, Literature, Literature, Literature])?,
    };
    let curv = partition.iter().map(|&ni| nf / ni as f64).collect();
    Model::assemble(spec, Arc::new(map), axes, ops, Some(blocks), curv)
}

/// Veronese surface in `𝕊⁴`. Its chart is validated on load: unit-sphere
/// residual, minimality and `S = 4/3` at a base point.
pub fn veronese() -> Result<Model> {
    let c = 1.0 / 3f64.sqrt();
    let ops = ShapeOperatorSet::new(vec![
        SymMat::diag(&[c, -c]),
        SymMat::from_rows(&[vec![0.0, c], vec![c, 0.0]])?,
    ])?;
    use Provenance::*;
    let spec = ModelSpec {
        kind: ModelKind::Veronese,
        id: "veronese".into(),
        params: ModelParams::default(),
        n: 2,
        m: 2,
        expected: invariants_table(&ops, 2, [Literature, Derived, Derived, Derived])?,
    };
    let model = Model::assemble(
        spec,
        Arc::new(VeroneseMap),
        VeroneseMap::axes(),
        ops,
        None,
        Vec::new(),
    )?;
    let (_, engine) = point_ops(model.chart(), &[0.7, 0.4])?;
    let residual = minimality_residual(&engine);
    let s = total_s(&engine);
    if residual > 1e-6 || (s - 4.0 / 3.0).abs() > 1e-6 {
        return Err(Error::Model(format!(
            "veronese chart failed validation: trace {residual:e}, S = {s}"
        )));
    }
    Ok(model)
}

/// Flat torus `𝕊¹(r) × 𝕊¹(√(1−r²)) ⊂ 𝕊³`, minimal only at `r = 1/√2`.
pub fn nonminimal_torus(r: f64) -> Result<Model> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Model(format!(
            "torus radius must lie in (0, 1), got {r}"
        )));
    }
    let s = (1.0 - r * r).sqrt();
    let map = SphereProductMap::new(vec![(1, r), (1, s)], 0)?;
    let axes = map.axes();
    let blocks = map.blocks();
    let ops = ShapeOperatorSet::new(vec![SymMat::diag(&[s / r, -r / s])])?;
    use Provenance::*;
    let spec = ModelSpec {
        kind: ModelKind::NonMinimalTorus,
        id: format!("nonminimal_torus(r={r})"),
        params: ModelParams {
            radius: Some(r),
            ..Default::default()
        },
        n: 2,
        m: 1,
        expected: invariants_table(&ops, 2, [Derived, Derived, Trivial, Trivial])?,
    };
    Model::assemble(spec, Arc::new(map), axes, ops, Some(blocks), vec![0.0, 0.0])
}

/// The registered minimal models.
pub fn zoo() -> Result<Vec<Model>> {
    let mut out = vec![great_sphere(2, 2)?, great_sphere(3, 1)?];
    for n in 2..=4 {
        for k in 1..n.min(4) {
            out.push(clifford(k, n)?);
        }
    }
    for p in [&[1, 1][..], &[1, 1, 2], &[1, 2, 3]] {
        out.push(sphere_product(p)?);
    }
    out.push(veronese()?);
    Ok(out)
}
