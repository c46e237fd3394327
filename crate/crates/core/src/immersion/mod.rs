//! Numerical differential geometry of chart-parametrized submanifolds of the unit sphere.

mod chart;
mod curvature;
mod fd;
mod frames;
mod quadrature;

pub use chart::{Axis, ChartMap, ImmersionChart, DEFAULT_MARGIN, RANK_TOL, SPHERE_TOL};
pub use curvature::{
    minimality_bound, minimality_residual, normal_curvature, rho_perp_from_definition,
    sectional_curvature, NormalCurvature,
};
pub use fd::{first_derivative, second_derivative, FdConfig, FdScheme};
pub use frames::{
    christoffels_at, frames_at, intrinsic_sectional_curvature, jacobian, metric_at, nabla_h,
    point_geometry, point_ops, second_derivatives, second_fundamental_form, Frames, NormalGauge,
    PointGeometry, GAUGE_ALIGNMENT_MIN,
};
pub use quadrature::{gauss_legendre, integrate, pairwise_sum, QuadratureGrid};
