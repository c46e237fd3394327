//! Central finite-difference stencils on vector-valued functions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdScheme {
    /// Plain second-order central differences (3-point, 4-point cross for mixed).
    Central2,
    /// Richardson-extrapolated central differences, fourth order.
    Richardson4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub step: f64,
    pub scheme: FdScheme,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-3,
            scheme: FdScheme::Richardson4,
        }
    }
}

impl FdConfig {
    /// Offsets (in units of `step`) and weights for a first derivative.
    pub fn first_stencil(&self) -> &'static [(f64, f64)] {
        match self.scheme {
            FdScheme::Central2 => &[(-1.0, -0.5), (1.0, 0.5)],
            FdScheme::Richardson4 => &[
                (-2.0, 1.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (2.0, -1.0 / 12.0),
            ],
        }
    }

    /// Largest offset reached by one first-derivative stencil, in units of `step`.
    pub fn reach(&self) -> f64 {
        match self.scheme {
            FdScheme::Central2 => 1.0,
            FdScheme::Richardson4 => 2.0,
        }
    }
}

fn axpy(acc: &mut [f64], w: f64, x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += w * v;
    }
}

fn shifted(u: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = u.to_vec();
    for (axis, d) in moves {
        p[*axis] += d;
    }
    p
}

/// `∂_a F(u)` for vector-valued `F`.
pub fn first_derivative<F>(f: &F, u: &[f64], axis: usize, cfg: &FdConfig) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = cfg.step;
    let mut acc: Option<Vec<f64>> = None;
    for (off, w) in cfg.first_stencil() {
        let v = f(&shifted(u, &[(axis, off * h)]));
        let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
        axpy(acc, w / h, &v);
    }
    acc.expect("non-empty stencil")
}

fn pure_second(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    u: &[f64],
    a: usize,
    h: f64,
    scheme: FdScheme,
) -> Vec<f64> {
    let center = f(u);
    let mut acc = vec![0.0; center.len()];
    match scheme {
        FdScheme::Central2 => {
            axpy(&mut acc, -2.0, &center);
            axpy(&mut acc, 1.0, &f(&shifted(u, &[(a, h)])));
            axpy(&mut acc, 1.0, &f(&shifted(u, &[(a, -h)])));
            acc.iter_mut().for_each(|x| *x /= h * h);
        }
        FdScheme::Richardson4 => {
            axpy(&mut acc, -30.0, &center);
            axpy(&mut acc, 16.0, &f(&shifted(u, &[(a, h)])));
            axpy(&mut acc, 16.0, &f(&shifted(u, &[(a, -h)])));
            axpy(&mut acc, -1.0, &f(&shifted(u, &[(a, 2.0 * h)])));
            axpy(&mut acc, -1.0, &f(&shifted(u, &[(a, -2.0 * h)])));
            acc.iter_mut().for_each(|x| *x /= 12.0 * h * h);
        }
    }
    acc
}

fn cross(f: &dyn Fn(&[f64]) -> Vec<f64>, u: &[f64], a: usize, b: usize, h: f64) -> Vec<f64> {
    let pp = f(&shifted(u, &[(a, h), (b, h)]));
    let mut acc = vec![0.0; pp.len()];
    axpy(&mut acc, 1.0, &pp);
    axpy(&mut acc, -1.0, &f(&shifted(u, &[(a, h), (b, -h)])));
    axpy(&mut acc, -1.0, &f(&shifted(u, &[(a, -h), (b, h)])));
    axpy(&mut acc, 1.0, &f(&shifted(u, &[(a, -h), (b, -h)])));
    acc.iter_mut().for_each(|x| *x /= 4.0 * h * h);
    acc
}

/// `∂_a ∂_b F(u)`.
pub fn second_derivative<F>(f: &F, u: &[f64], a: usize, b: usize, cfg: &FdConfig) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = cfg.step;
    if a == b {
        return pure_second(f, u, a, h, cfg.scheme);
    }
    match cfg.scheme {
        FdScheme::Central2 => cross(f, u, a, b, h),
        FdScheme::Richardson4 => {
            let fine = cross(f, u, a, b, h);
            let coarse = cross(f, u, a, b, 2.0 * h);
            fine.iter()
                .zip(&coarse)
                .map(|(x, y)| (4.0 * x - y) / 3.0)
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig(u: &[f64]) -> Vec<f64> {
        vec![u[0].sin() * u[1].cos(), (u[0] * u[1]).exp()]
    }

    #[test]
    fn richardson_derivatives_are_accurate() {
        let cfg = FdConfig::default();
        let u = [0.3f64, -0.7];
        let d0 = first_derivative(&trig, &u, 0, &cfg);
        assert!((d0[0] - u[0].cos() * u[1].cos()).abs() < 1e-12);
        let d01 = second_derivative(&trig, &u, 0, 1, &cfg);
        assert!((d01[0] + u[0].cos() * u[1].sin()).abs() < 1e-9);
        let e = (u[0] * u[1]).exp();
        assert!((d01[1] - (e + u[0] * u[1] * e)).abs() < 1e-9);
        let d11 = second_derivative(&trig, &u, 1, 1, &cfg);
        assert!((d11[0] + u[0].sin() * u[1].cos()).abs() < 1e-9);
    }

    #[test]
    fn central2_error_shrinks_quadratically() {
        let u = [0.4f64, 0.9];
        let exact = -u[0].sin() * u[1].cos();
        let err = |h: f64| {
            let cfg = FdConfig {
                step: h,
                scheme: FdScheme::Central2,
            };
            (second_derivative(&trig, &u, 0, 0, &cfg)[0] - exact).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
