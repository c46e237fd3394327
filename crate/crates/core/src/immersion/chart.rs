use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fd::FdConfig;
use crate::error::{Error, Result};
use crate::matcore::random::sample_rng;

/// `|f(u)|² − 1` must stay within this at every sampled point.
pub const SPHERE_TOL: f64 = 1e-10;
/// Smallest admissible singular value of the chart Jacobian.
pub const RANK_TOL: f64 = 1e-8;
/// Non-periodic axes are shrunk by this fraction of their length at both ends.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// A parametrization `u ∈ ℝⁿ ↦ f(u) ∈ ℝᴺ` of a piece of a submanifold of the
/// unit sphere `𝕊ᴺ⁻¹`.
pub trait ChartMap: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn eval(&self, u: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn periodic(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: true,
        }
    }

    pub fn bounded(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Interval used for sampling: the full period, or the box shrunk by
    /// `margin · length` at both ends.
    pub fn shrunk(&self, margin: f64) -> (f64, f64) {
        if self.periodic {
            (self.lo, self.hi)
        } else {
            let d = margin * self.length();
            (self.lo + d, self.hi - d)
        }
    }
}

#[derive(Clone)]
pub struct ImmersionChart {
    map: Arc<dyn ChartMap>,
    axes: Vec<Axis>,
    grid: Vec<usize>,
    fd: FdConfig,
    margin: f64,
}

impl fmt::Debug for ImmersionChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionChart")
            .field("map", &self.map)
            .field("axes", &self.axes)
            .field("grid", &self.grid)
            .field("fd", &self.fd)
            .field("margin", &self.margin)
            .finish()
    }
}

impl ImmersionChart {
    pub fn new(map: Arc<dyn ChartMap>, axes: Vec<Axis>) -> Result<Self> {
        if axes.len() != map.dim() {
            return Err(Error::Shape(format!(
                "chart of dimension {} given {} axes",
                map.dim(),
                axes.len()
            )));
        }
        if let Some(a) = axes.iter().find(|a| !(a.hi > a.lo)) {
            return Err(Error::Config(format!("empty axis [{}, {}]", a.lo, a.hi)));
        }
        let grid = vec![4; axes.len()];
        Ok(ImmersionChart {
            map,
            axes,
            grid,
            fd: FdConfig::default(),
            margin: DEFAULT_MARGIN,
        })
    }

    pub fn with_grid(mut self, grid: Vec<usize>) -> Result<Self> {
        if grid.len() != self.axes.len() || grid.contains(&0) {
            return Err(Error::Config(format!(
                "grid {grid:?} must give a positive count for each of {} axes",
                self.axes.len()
            )));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Result<Self> {
        if !(fd.step > 0.0) {
            return Err(Error::Config(format!(
                "fd_step must be positive, got {}",
                fd.step
            )));
        }
        self.fd = fd;
        Ok(self)
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&margin) {
            return Err(Error::Config(format!(
                "margin must lie in [0, 0.5), got {margin}"
            )));
        }
        self.margin = margin;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.map.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.ambient_dim()
    }

    /// Codimension in the sphere: `N − n − 1`.
    pub fn m(&self) -> usize {
        self.ambient_dim() - self.n() - 1
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn fd(&self) -> &FdConfig {
        &self.fd
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn map(&self) -> &Arc<dyn ChartMap> {
        &self.map
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.map.eval(u)
    }

    /// `|f(u)|² − 1`.
    pub fn sphere_residual(&self, u: &[f64]) -> f64 {
        self.eval(u).iter().map(|x| x * x).sum::<f64>() - 1.0
    }

    /// Sample grid: the full period uniformly on periodic axes, cell
    /// midpoints of the shrunken interval on the others; last axis fastest.
    pub fn sample_points(&self) -> Vec<Vec<f64>> {
        self.tensor_points(&self.grid)
    }

    pub fn tensor_points(&self, counts: &[usize]) -> Vec<Vec<f64>> {
        let per_axis: Vec<Vec<f64>> = self
            .axes
            .iter()
            .zip(counts)
            .map(|(axis, &count)| {
                let (lo, hi) = axis.shrunk(self.margin);
                let step = (hi - lo) / count as f64;
                (0..count)
                    .map(|j| {
                        if axis.periodic {
                            lo + j as f64 * step
                        } else {
                            lo + (j as f64 + 0.5) * step
                        }
                    })
                    .collect()
            })
            .collect();
        cartesian(&per_axis)
    }

    /// Uniform random points, kept 10% of the axis length away from the ends
    /// of non-periodic axes.
    pub fn random_interior_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..count)
            .map(|i| {
                let mut rng = sample_rng(seed, i as u64);
                self.axes
                    .iter()
                    .map(|a| {
                        let (lo, hi) = if a.periodic {
                            (a.lo, a.hi)
                        } else {
                            (a.lo + 0.1 * a.length(), a.hi - 0.1 * a.length())
                        };
                        rng.gen_range(lo..hi)
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks `|f|² = 1` at every sample point.
    pub fn validate_sphere(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for u in self.sample_points() {
            let r = self.sphere_residual(&u).abs();
            if r > SPHERE_TOL {
                return Err(Error::Model(format!("|f|^2 - 1 = {r:e} at u = {u:?}")));
            }
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

pub(crate) fn cartesian(per_axis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for values in per_axis {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}
