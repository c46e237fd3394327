//! Frames, second fundamental form and its covariant derivative at a chart point.
//!
//! Conventions: `ω_AB = ⟨de_A, e_B⟩`, `h_ij^α = ⟨D_{e_j} e_i, ξ_α⟩`, and
//! `Σ_k h_ijk^α ω_k = dh_ij^α + Σ_l h_lj^α ω_li + Σ_l h_il^α ω_lj + Σ_β h_ij^β ω_βα`.

use super::chart::{ImmersionChart, RANK_TOL};
use super::fd::{first_derivative, second_derivative};
use crate::error::{Error, Result};
use crate::ineq::NablaH;
use crate::matcore::{jacobi_eigen, GenMat, ShapeOperatorSet, SymMat};

/// Neighbouring normal frames must overlap at least this much with the centre frame.
pub const GAUGE_ALIGNMENT_MIN: f64 = 0.9;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes the components along an orthonormal `basis`, twice.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let d = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
}

/// How the normal frame is chosen at a point.
#[derive(Debug, Clone, Copy)]
pub enum NormalGauge<'a> {
    /// Complete `{f, e_i}` from the ambient coordinate basis, greedily taking
    /// the coordinate direction with the largest normal component.
    Pivoted,
    /// Complete from these ambient coordinate directions, in order.
    Seeds(&'a [usize]),
    /// Polar alignment to a reference frame: `ξ = X (XᵀX)^{-1/2}`, `X = P_⊥ ref`.
    Align(&'a [Vec<f64>]),
}

/// Frames and first-order data at a chart point.
#[derive(Debug, Clone)]
pub struct Frames {
    pub u: Vec<f64>,
    pub position: Vec<f64>,
    /// Columns `∂_a f`.
    pub jacobian: Vec<Vec<f64>>,
    pub tangent: Vec<Vec<f64>>,
    pub normal: Vec<Vec<f64>>,
    /// `g_ab = ⟨∂_a f, ∂_b f⟩`.
    pub metric: SymMat,
    /// `C` with `e_i = Σ_a C_ia ∂_a f`, so that `C g Cᵀ = I`.
    pub change_of_basis: GenMat,
    pub sigma_min: f64,
    /// Ambient coordinate directions the normal frame was completed from.
    pub seeds: Vec<usize>,
}

impl Frames {
    /// Largest deviation from orthonormality of `{f, e_i, ξ_α}`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut all: Vec<&[f64]> = vec![&self.position];
        all.extend(self.tangent.iter().map(Vec::as_slice));
        all.extend(self.normal.iter().map(Vec::as_slice));
        let mut worst = 0.0f64;
        for i in 0..all.len() {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(all[i], all[j]) - target).abs());
            }
        }
        worst
    }

    /// `√det g`.
    pub fn volume_element(&self) -> f64 {
        // det g = (det T)² with T triangular from Gram–Schmidt; via C = T⁻ᵀ
        let n = self.tangent.len();
        let mut det_t = 1.0;
        for i in 0..n {
            det_t *= dot(&self.tangent[i], &self.jacobian[i]);
        }
        det_t.abs()
    }
}

pub fn jacobian(chart: &ImmersionChart, u: &[f64]) -> Vec<Vec<f64>> {
    let f = |p: &[f64]| chart.eval(p);
    (0..chart.n())
        .map(|a| first_derivative(&f, u, a, chart.fd()))
        .collect()
}

pub fn metric_at(chart: &ImmersionChart, u: &[f64]) -> SymMat {
    metric_from_jacobian(&jacobian(chart, u))
}

fn metric_from_jacobian(jac: &[Vec<f64>]) -> SymMat {
    let n = jac.len();
    let mut g = SymMat::zeros(n);
    for a in 0..n {
        for b in 0..=a {
            g.set(a, b, dot(&jac[a], &jac[b]));
        }
    }
    g
}

/// Tangent frame by Gram–Schmidt on the Jacobian columns, then the normal
/// frame completing `{f, e_1, …, e_n}` to an orthonormal ambient basis.
pub fn frames_at(chart: &ImmersionChart, u: &[f64], gauge: NormalGauge<'_>) -> Result<Frames> {
    let n = chart.n();
    let big_n = chart.ambient_dim();
    let m = chart.m();
    let position = chart.eval(u);
    let jac = jacobian(chart, u);
    let metric = metric_from_jacobian(&jac);

    let eig = jacobi_eigen(&metric)?;
    let sigma_min = eig
        .values
        .iter()
        .fold(f64::INFINITY, |a, b| a.min(*b))
        .max(0.0)
        .sqrt();
    if !(sigma_min > RANK_TOL) {
        return Err(Error::ChartDegenerate {
            u: u.to_vec(),
            sigma_min,
        });
    }

    let mut tangent: Vec<Vec<f64>> = Vec::with_capacity(n);
    for col in &jac {
        let mut v = col.clone();
        project_out(&mut v, &tangent);
        let len = norm(&v);
        if len <= RANK_TOL * norm(col) {
            return Err(Error::ChartDegenerate {
                u: u.to_vec(),
                sigma_min,
            });
        }
        v.iter_mut().for_each(|x| *x /= len);
        tangent.push(v);
    }

    // T_ia = ⟨e_i, ∂_a f⟩ (upper triangular), C = T⁻ᵀ
    let mut t = GenMat::zeros(n, n);
    for i in 0..n {
        for a in 0..n {
            t[(i, a)] = dot(&tangent[i], &jac[a]);
        }
    }
    let change_of_basis = t.inverse()?.transpose();

    let pos_len = norm(&position);
    let mut basis: Vec<Vec<f64>> = vec![position.iter().map(|x| x / pos_len).collect()];
    basis.extend(tangent.iter().cloned());

    let unit = |s: usize| {
        let mut v = vec![0.0; big_n];
        v[s] = 1.0;
        v
    };

    let (normal, seeds) = match gauge {
        NormalGauge::Pivoted => {
            let mut normal = Vec::with_capacity(m);
            let mut seeds = Vec::with_capacity(m);
            for _ in 0..m {
                let mut best: Option<(usize, Vec<f64>, f64)> = None;
                for s in (0..big_n).filter(|s| !seeds.contains(s)) {
                    let mut v = unit(s);
                    project_out(&mut v, &basis);
                    project_out(&mut v, &normal);
                    let len = norm(&v);
                    if best.as_ref().is_none_or(|b| len > b.2) {
                        best = Some((s, v, len));
                    }
                }
                let (s, mut v, len) = best.expect("ambient dimension exceeds n + 1");
                v.iter_mut().for_each(|x| *x /= len);
                normal.push(v);
                seeds.push(s);
            }
            (normal, seeds)
        }
        NormalGauge::Seeds(list) => {
            if list.len() != m {
                return Err(Error::Shape(format!(
                    "{} seeds for codimension {m}",
                    list.len()
                )));
            }
            let mut normal: Vec<Vec<f64>> = Vec::with_capacity(m);
            for &s in list {
                let mut v = unit(s);
                project_out(&mut v, &basis);
                project_out(&mut v, &normal);
                let len = norm(&v);
                if len < 1e-3 {
                    return Err(Error::Gauge {
                        u: u.to_vec(),
                        alignment: len,
                    });
                }
                v.iter_mut().for_each(|x| *x /= len);
                normal.push(v);
            }
            (normal, list.to_vec())
        }
        NormalGauge::Align(reference) => {
            if reference.len() != m {
                return Err(Error::Shape(format!(
                    "reference frame has {} vectors, need {m}",
                    reference.len()
                )));
            }
            let x: Vec<Vec<f64>> = reference
                .iter()
                .map(|r| {
                    let mut v = r.clone();
                    project_out(&mut v, &basis);
                    v
                })
                .collect();
            let mut xtx = SymMat::zeros(m);
            for a in 0..m {
                for b in 0..=a {
                    xtx.set(a, b, dot(&x[a], &x[b]));
                }
            }
            let root = crate::matcore::inv_sqrt_spd(&xtx).map_err(|_| Error::Gauge {
                u: u.to_vec(),
                alignment: 0.0,
            })?;
            let normal: Vec<Vec<f64>> = (0..m)
                .map(|b| {
                    let mut v = vec![0.0; big_n];
                    for a in 0..m {
                        let w = root.get(a, b);
                        v.iter_mut().zip(&x[a]).for_each(|(o, xi)| *o += w * xi);
                    }
                    v
                })
                .collect();
            let alignment = normal
                .iter()
                .zip(reference)
                .map(|(v, r)| dot(v, r))
                .fold(f64::INFINITY, f64::min);
            if alignment < GAUGE_ALIGNMENT_MIN {
                return Err(Error::Gauge {
                    u: u.to_vec(),
                    alignment,
                });
            }
            (normal, Vec::new())
        }
    };

    Ok(Frames {
        u: u.to_vec(),
        position,
        jacobian: jac,
        tangent,
        normal,
        metric,
        change_of_basis,
        sigma_min,
        seeds,
    })
}

/// Coordinate second derivatives `F_ab = ∂_a ∂_b f`, indexed `[a][b]`.
pub fn second_derivatives(chart: &ImmersionChart, u: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let f = |p: &[f64]| chart.eval(p);
    let n = chart.n();
    let mut out = vec![vec![Vec::new(); n]; n];
    for a in 0..n {
        for b in 0..=a {
            let d = second_derivative(&f, u, a, b, chart.fd());
            out[b][a] = d.clone();
            out[a][b] = d;
        }
    }
    out
}

/// `h_ij^α = Σ_ab C_ia C_jb ⟨F_ab, ξ_α⟩` in the orthonormal frames.
pub fn second_fundamental_form(
    chart: &ImmersionChart,
    frames: &Frames,
) -> Result<ShapeOperatorSet> {
    let n = chart.n();
    let f2 = second_derivatives(chart, &frames.u);
    let ct = frames.change_of_basis.transpose();
    let ops = frames
        .normal
        .iter()
        .map(|xi| {
            let mut coord = SymMat::zeros(n);
            for a in 0..n {
                for b in 0..=a {
                    coord.set(a, b, dot(&f2[a][b], xi));
                }
            }
            coord.congruence(&ct)
        })
        .collect::<Result<Vec<_>>>()?;
    ShapeOperatorSet::new(ops)
}

/// Full pointwise geometry including connection data and `∇h`.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub frames: Frames,
    /// `Γ^c_ab`, indexed `[c][a][b]`, from finite differences of the metric.
    pub christoffels: Vec<Vec<Vec<f64>>>,
    pub ops: ShapeOperatorSet,
    /// Per coordinate direction `a`: `ω_li(∂_a) = ⟨∂_a e_l, e_i⟩` at `[(l, i)]`.
    pub tangent_connection: Vec<GenMat>,
    /// Per coordinate direction `a`: `ω_βα(∂_a) = ⟨∂_a ξ_β, ξ_α⟩` at `[(β, α)]`.
    pub normal_connection: Vec<GenMat>,
    pub nabla_h: NablaH,
    /// `max |h_ijk − h_ikj|` over the computed `∇h`.
    pub codazzi_defect: f64,
    /// Smallest overlap between neighbouring and centre normal frames.
    pub gauge_alignment: f64,
}

struct Neighbour {
    frames: Frames,
    ops: ShapeOperatorSet,
}

/// Frames and shape operators at one point (no derivative data).
pub fn point_ops(chart: &ImmersionChart, u: &[f64]) -> Result<(Frames, ShapeOperatorSet)> {
    let frames = frames_at(chart, u, NormalGauge::Pivoted)?;
    let ops = second_fundamental_form(chart, &frames)?;
    Ok((frames, ops))
}

pub fn point_geometry(chart: &ImmersionChart, u: &[f64]) -> Result<PointGeometry> {
    let n = chart.n();
    let m = chart.m();
    let (frames, ops) = point_ops(chart, u)?;
    let fd = chart.fd();
    let h = fd.step;
    let stencil = fd.first_stencil();

    let mut gauge_alignment = f64::INFINITY;
    // derivative accumulators per coordinate direction
    let mut d_ops: Vec<Vec<SymMat>> = vec![vec![SymMat::zeros(n); m]; n];
    let mut d_tan: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; chart.ambient_dim()]; n]; n];
    let mut d_nor: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; chart.ambient_dim()]; m]; n];
    let mut d_metric: Vec<SymMat> = vec![SymMat::zeros(n); n];

    for c in 0..n {
        for (off, w) in stencil {
            let mut p = u.to_vec();
            p[c] += off * h;
            let nb_frames = frames_at(chart, &p, NormalGauge::Seeds(&frames.seeds))?;
            let nb_ops = second_fundamental_form(chart, &nb_frames)?;
            let nb = Neighbour {
                frames: nb_frames,
                ops: nb_ops,
            };
            for (xi_nb, xi) in nb.frames.normal.iter().zip(&frames.normal) {
                gauge_alignment = gauge_alignment.min(dot(xi_nb, xi));
            }
            let wh = w / h;
            for a in 0..m {
                d_ops[c][a] = d_ops[c][a].add_scaled(&nb.ops.ops()[a], wh)?;
            }
            for l in 0..n {
                d_tan[c][l]
                    .iter_mut()
                    .zip(&nb.frames.tangent[l])
                    .for_each(|(o, x)| *o += wh * x);
            }
            for b in 0..m {
                d_nor[c][b]
                    .iter_mut()
                    .zip(&nb.frames.normal[b])
                    .for_each(|(o, x)| *o += wh * x);
            }
            d_metric[c] = d_metric[c].add_scaled(&nb.frames.metric, wh)?;
        }
    }
    if gauge_alignment < GAUGE_ALIGNMENT_MIN {
        return Err(Error::Gauge {
            u: u.to_vec(),
            alignment: gauge_alignment,
        });
    }

    let tangent_connection: Vec<GenMat> = (0..n)
        .map(|c| {
            let mut w = GenMat::zeros(n, n);
            for l in 0..n {
                for i in 0..n {
                    w[(l, i)] = dot(&d_tan[c][l], &frames.tangent[i]);
                }
            }
            w
        })
        .collect();
    let normal_connection: Vec<GenMat> = (0..n)
        .map(|c| {
            let mut w = GenMat::zeros(m, m);
            for b in 0..m {
                for a in 0..m {
                    w[(b, a)] = dot(&d_nor[c][b], &frames.normal[a]);
                }
            }
            w
        })
        .collect();

    let ginv = frames.metric.as_gen().inverse()?;
    let mut christoffels = vec![vec![vec![0.0; n]; n]; n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += ginv[(c, d)]
                        * (d_metric[a].get(b, d) + d_metric[b].get(a, d) - d_metric[d].get(a, b));
                }
                christoffels[c][a][b] = 0.5 * s;
            }
        }
    }

    let cb = &frames.change_of_basis;
    let a_ops = ops.ops();
    let mut nabla_h = NablaH::zeros(n, m);
    for alpha in 0..m {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.0;
                    for c in 0..n {
                        let ckc = cb[(k, c)];
                        if ckc == 0.0 {
                            continue;
                        }
                        let wt = &tangent_connection[c];
                        let wn = &normal_connection[c];
                        let mut term = d_ops[c][alpha].get(i, j);
                        for l in 0..n {
                            term += a_ops[alpha].get(l, j) * wt[(l, i)]
                                + a_ops[alpha].get(i, l) * wt[(l, j)];
                        }
                        for beta in 0..m {
                            term += a_ops[beta].get(i, j) * wn[(beta, alpha)];
                        }
                        v += ckc * term;
                    }
                    nabla_h.set(alpha, i, j, k, v);
                }
            }
        }
    }
    let codazzi_defect = nabla_h.codazzi_defect();

    Ok(PointGeometry {
        frames,
        christoffels,
        ops,
        tangent_connection,
        normal_connection,
        nabla_h,
        codazzi_defect,
        gauge_alignment,
    })
}

/// `∇h` at `u` (see [`point_geometry`]).
pub fn nabla_h(chart: &ImmersionChart, u: &[f64]) -> Result<NablaH> {
    Ok(point_geometry(chart, u)?.nabla_h)
}

/// Christoffel symbols `Γ^c_ab` (`[c][a][b]`) from finite differences of the metric.
pub fn christoffels_at(chart: &ImmersionChart, u: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = chart.n();
    let fd = chart.fd();
    let mut d_metric = vec![SymMat::zeros(n); n];
    for (c, dm) in d_metric.iter_mut().enumerate() {
        for (off, w) in fd.first_stencil() {
            let mut p = u.to_vec();
            p[c] += off * fd.step;
            *dm = dm.add_scaled(&metric_at(chart, &p), w / fd.step)?;
        }
    }
    let ginv = metric_at(chart, u).as_gen().inverse()?;
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                gamma[c][a][b] = 0.5
                    * (0..n)
                        .map(|d| {
                            ginv[(c, d)]
                                * (d_metric[a].get(b, d) + d_metric[b].get(a, d)
                                    - d_metric[d].get(a, b))
                        })
                        .sum::<f64>();
            }
        }
    }
    Ok(gamma)
}

/// Sectional curvature of the coordinate plane `span{∂_a, ∂_b}` from the
/// intrinsic metric alone (Christoffels and their finite differences).
pub fn intrinsic_sectional_curvature(
    chart: &ImmersionChart,
    u: &[f64],
    a: usize,
    b: usize,
) -> Result<f64> {
    if a == b {
        return Err(Error::Domain(
            "sectional curvature needs two distinct directions".into(),
        ));
    }
    let n = chart.n();
    let fd = chart.fd();
    let gamma = christoffels_at(chart, u)?;
    // ∂_x Γ for x ∈ {a, b}
    let d_gamma = |x: usize| -> Result<Vec<Vec<Vec<f64>>>> {
        let mut acc = vec![vec![vec![0.0; n]; n]; n];
        for (off, w) in fd.first_stencil() {
            let mut p = u.to_vec();
            p[x] += off * fd.step;
            let g = christoffels_at(chart, &p)?;
            for c in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        acc[c][i][j] += w / fd.step * g[c][i][j];
                    }
                }
            }
        }
        Ok(acc)
    };
    let da = d_gamma(a)?;
    let db = d_gamma(b)?;
    // R^d_{bab} = ∂_a Γ^d_bb − ∂_b Γ^d_ab + Γ^d_ae Γ^e_bb − Γ^d_be Γ^e_ab
    let g = metric_at(chart, u);
    let mut r_abab = 0.0;
    for d in 0..n {
        let mut r = da[d][b][b] - db[d][a][b];
        for e in 0..n {
            r += gamma[d][a][e] * gamma[e][b][b] - gamma[d][b][e] * gamma[e][a][b];
        }
        r_abab += g.get(a, d) * r;
    }
    Ok(r_abab / (g.get(a, a) * g.get(b, b) - g.get(a, b) * g.get(a, b)))
}
