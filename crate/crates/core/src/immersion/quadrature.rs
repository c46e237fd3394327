//! Tensor-product quadrature on a chart with the Riemannian volume element.

use rayon::prelude::*;

use super::chart::{cartesian, ImmersionChart};
use super::frames::metric_at;
use crate::error::{Error, Result};
use crate::matcore::jacobi_eigen;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let k = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=count {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            let p = if count == 0 {
                1.0
            } else if count == 1 {
                x
            } else {
                p1
            };
            let pm1 = if count == 1 { 1.0 } else { p0 };
            dp = k * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

/// Order-preserving pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Nodes and weights, the weights already including `√det g`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Trapezoid rule over the full period on periodic axes, Gauss–Legendre on
    /// the others. Gauss nodes are interior, so coordinate poles are never evaluated.
    pub fn new(chart: &ImmersionChart, counts: &[usize]) -> Result<Self> {
        if counts.len() != chart.n() || counts.contains(&0) {
            return Err(Error::Config(format!(
                "quadrature counts {counts:?} invalid for n = {}",
                chart.n()
            )));
        }
        let mut per_axis_nodes = Vec::new();
        let mut per_axis_weights = Vec::new();
        for (axis, &count) in chart.axes().iter().zip(counts) {
            if axis.periodic {
                let h = axis.length() / count as f64;
                per_axis_nodes.push(
                    (0..count)
                        .map(|j| axis.lo + j as f64 * h)
                        .collect::<Vec<_>>(),
                );
                per_axis_weights.push(vec![h; count]);
            } else {
                let (x, w) = gauss_legendre(count);
                let half = 0.5 * axis.length();
                let mid = 0.5 * (axis.lo + axis.hi);
                per_axis_nodes.push(x.iter().map(|t| mid + half * t).collect());
                per_axis_weights.push(w.iter().map(|w| half * w).collect());
            }
        }
        let nodes = cartesian(&per_axis_nodes);
        let base: Vec<f64> = cartesian(&per_axis_weights)
            .iter()
            .map(|w| w.iter().product())
            .collect();
        let weights = nodes
            .par_iter()
            .zip(base.par_iter())
            .enumerate()
            .map(|(i, (u, w))| {
                let eig = jacobi_eigen(&metric_at(chart, u))?;
                let det: f64 = eig.values.iter().product();
                let vol = det.max(0.0).sqrt();
                if !vol.is_finite() {
                    return Err(Error::NonFinite {
                        node: i,
                        u: u.clone(),
                        value: vol,
                    });
                }
                Ok(w * vol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuadratureGrid { nodes, weights })
    }

    pub fn from_chart(chart: &ImmersionChart) -> Result<Self> {
        Self::new(chart, chart.grid())
    }

    pub fn volume(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// `Σ field(node) · weight`, evaluated in parallel and summed in node order.
    pub fn integrate<F>(&self, field: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values = self
            .nodes
            .par_iter()
            .enumerate()
            .map(|(i, u)| {
                let v = field(u)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        node: i,
                        u: u.clone(),
                        value: v,
                    });
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        self.integrate_values(&values)
    }

    /// Weighted sum of values already evaluated at [`Self::nodes`].
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::Shape(format!(
                "{} values for {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                node: i,
                u: self.nodes[i].clone(),
                value: values[i],
            });
        }
        let terms: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        Ok(pairwise_sum(&terms))
    }
}

/// `∫ field dM` over the chart with the given per-axis node counts.
pub fn integrate<F>(chart: &ImmersionChart, counts: &[usize], field: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    QuadratureGrid::new(chart, counts)?.integrate(field)
}
