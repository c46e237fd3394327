#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::sync::Arc;

use pinch_core::immersion::{
    frames_at, intrinsic_sectional_curvature, minimality_residual, point_geometry, point_ops,
    rho_perp_from_definition, sectional_curvature, Axis, ChartMap, FdConfig, FdScheme,
    ImmersionChart, NormalGauge, QuadratureGrid,
};
use pinch_core::ineq::simons_balance;
use pinch_core::matcore::{gram, lambda_spectrum, rho_perp, rho_perp0, total_s};
use pinch_core::models::{
    clifford, great_sphere, nonminimal_torus, sphere_product, veronese, zoo, Model,
};
use pinch_core::Error;

#[derive(Debug)]
struct GreatCircle;

impl ChartMap for GreatCircle {
    fn dim(&self) -> usize {
        1
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn eval(&self, u: &[f64]) -> Vec<f64> {
        vec![u[0].cos(), u[0].sin(), 0.0]
    }
}

#[derive(Debug)]
struct Pinched;

impl ChartMap for Pinched {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        4
    }
    // second coordinate never moves the point
    fn eval(&self, u: &[f64]) -> Vec<f64> {
        vec![u[0].cos(), u[0].sin(), 0.0, 0.0]
    }
}

fn spectrum_l1(model_ops: &pinch_core::matcore::ShapeOperatorSet) -> f64 {
    lambda_spectrum(&gram(model_ops)).unwrap().lambda1()
}

#[test]
fn great_circle_frames() {
    let chart =
        ImmersionChart::new(Arc::new(GreatCircle), vec![Axis::periodic(0.0, 2.0 * PI)]).unwrap();
    let u = 0.8f64;
    let fr = frames_at(&chart, &[u], NormalGauge::Pivoted).unwrap();
    assert!((fr.tangent[0][0] + u.sin()).abs() < 1e-10);
    assert!((fr.tangent[0][1] - u.cos()).abs() < 1e-10);
    assert!((fr.normal[0][2].abs() - 1.0).abs() < 1e-12);
    assert!(fr.orthonormality_residual() < 1e-9);
}

#[test]
fn rank_deficiency_is_reported() {
    let chart = ImmersionChart::new(
        Arc::new(Pinched),
        vec![Axis::periodic(0.0, 2.0 * PI), Axis::bounded(0.0, 1.0)],
    )
    .unwrap();
    match frames_at(&chart, &[0.3, 0.5], NormalGauge::Pivoted) {
        Err(Error::ChartDegenerate { u, .. }) => assert_eq!(u, vec![0.3, 0.5]),
        other => panic!("expected chart degeneracy, got {other:?}"),
    }
}

#[test]
fn equatorial_sphere_normal_is_constant() {
    let model = great_sphere(2, 1).unwrap();
    for u in model.chart().random_interior_points(5, 3) {
        let fr = frames_at(model.chart(), &u, NormalGauge::Pivoted).unwrap();
        assert!((fr.normal[0][3].abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn align_gauge_matches_reference() {
    let model = veronese().unwrap();
    let u = [0.6, 1.0];
    let base = frames_at(model.chart(), &u, NormalGauge::Pivoted).unwrap();
    let aligned = frames_at(
        model.chart(),
        &[0.6005, 1.0003],
        NormalGauge::Align(&base.normal),
    )
    .unwrap();
    assert!(aligned.orthonormality_residual() < 1e-9);
    for (a, b) in aligned.normal.iter().zip(&base.normal) {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        assert!(d > 0.99);
    }
}

fn check_point_geometry(model: &Model, points: usize, seed: u64) {
    let n = model.n();
    for u in model.chart().random_interior_points(points, seed) {
        let pg = point_geometry(model.chart(), &u).unwrap();
        assert!(
            pg.frames.orthonormality_residual() < 1e-9,
            "{}: frames",
            model.id()
        );
        for w in &pg.normal_connection {
            let m = w.rows();
            for a in 0..m {
                for b in 0..m {
                    assert!(
                        (w[(a, b)] + w[(b, a)]).abs() < 1e-8,
                        "{}: ω not antisymmetric",
                        model.id()
                    );
                }
            }
        }
        let ops = &pg.ops;
        let expected = model.algebraic_ops();
        assert!(
            (total_s(ops) - total_s(expected)).abs() < 1e-6,
            "{}: S",
            model.id()
        );
        assert!(
            (spectrum_l1(ops) - spectrum_l1(expected)).abs() < 1e-6,
            "{}: λ1",
            model.id()
        );
        assert!(
            (rho_perp0(ops) - rho_perp0(expected)).abs() < 1e-6,
            "{}: ρ⊥₀",
            model.id()
        );
        assert!(minimality_residual(ops) <= 1e-6, "{}: trace", model.id());
        let s = total_s(ops);
        assert!(
            simons_balance(ops, n).abs() <= 1e-6 * (n as f64 * s).max(1.0),
            "{}: simons",
            model.id()
        );
        assert!(
            pg.nabla_h.norm2() <= 1e-4,
            "{}: |∇h|² = {}",
            model.id(),
            pg.nabla_h.norm2()
        );
        assert!(
            pg.codazzi_defect <= 1e-3,
            "{}: codazzi {}",
            model.id(),
            pg.codazzi_defect
        );
        if n >= 2 {
            let d = rho_perp_from_definition(ops, n).unwrap();
            let f = rho_perp(ops, n).unwrap();
            assert!((d - f).abs() <= 1e-10 * f.max(1e-300) || (d - f).abs() < 1e-15);
        }
    }
}

#[test]
fn zoo_engine_matches_algebraic_operators() {
    for model in zoo().unwrap() {
        let points = if model.n() <= 3 { 25 } else { 6 };
        check_point_geometry(&model, points, 11);
    }
}

#[test]
fn clifford_principal_curvatures() {
    let model = clifford(1, 2).unwrap();
    let (_, ops) = point_ops(model.chart(), &[0.4, 2.0]).unwrap();
    let a = &ops.ops()[0];
    assert!(a.get(0, 1).abs() < 1e-8);
    let mut d = [a.get(0, 0).abs(), a.get(1, 1).abs()];
    d.sort_by(f64::total_cmp);
    assert!((d[0] - 1.0).abs() < 1e-8 && (d[1] - 1.0).abs() < 1e-8);
    assert!((total_s(&ops) - 2.0).abs() < 1e-8);
}

#[test]
fn veronese_invariants() {
    let model = veronese().unwrap();
    for u in model.chart().random_interior_points(10, 5) {
        let (_, ops) = point_ops(model.chart(), &u).unwrap();
        assert!((total_s(&ops) - 4.0 / 3.0).abs() < 1e-6);
        assert!((rho_perp(&ops, 2).unwrap() - 2.0 / 3.0).abs() < 1e-6);
        assert!((sectional_curvature(&ops, 0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }
}

#[test]
fn sphere_product_sectional_curvatures() {
    for p in [&[1, 1][..], &[1, 1, 2], &[1, 2, 3]] {
        let model = sphere_product(p).unwrap();
        for u in model.chart().random_interior_points(3, 9) {
            let (_, ops) = point_ops(model.chart(), &u).unwrap();
            for i in 0..model.n() {
                for j in 0..model.n() {
                    if i != j {
                        let k = sectional_curvature(&ops, i, j).unwrap();
                        let e = model.expected_sectional(i, j).unwrap();
                        assert!((k - e).abs() < 1e-4, "{p:?} ({i},{j}): {k} vs {e}");
                    }
                }
            }
        }
    }
}

#[test]
fn intrinsic_curvature_matches_gauss_equation() {
    let torus = clifford(1, 2).unwrap();
    let k = intrinsic_sectional_curvature(torus.chart(), &[0.3, 1.2], 0, 1).unwrap();
    assert!(k.abs() < 1e-4, "flat torus curvature {k}");
    let sphere = great_sphere(2, 1).unwrap();
    let k = intrinsic_sectional_curvature(sphere.chart(), &[1.0, 0.5], 0, 1).unwrap();
    assert!((k - 1.0).abs() < 1e-4, "round sphere curvature {k}");
    let v = veronese().unwrap();
    let k = intrinsic_sectional_curvature(v.chart(), &[0.8, 0.5], 0, 1).unwrap();
    assert!((k - 1.0 / 3.0).abs() < 1e-4, "veronese curvature {k}");
}

#[test]
fn nonminimal_control_has_nonzero_trace() {
    let model = nonminimal_torus(0.5).unwrap();
    let (_, ops) = point_ops(model.chart(), &[0.2, 0.9]).unwrap();
    assert!(minimality_residual(&ops) > 0.5);
}

#[test]
fn quadrature_areas() {
    let sphere = great_sphere(2, 1).unwrap();
    let area = QuadratureGrid::new(sphere.chart(), &[128, 256])
        .unwrap()
        .volume();
    assert!((area / (4.0 * PI) - 1.0).abs() < 1e-6, "sphere area {area}");

    let torus = clifford(1, 2).unwrap();
    let grid = QuadratureGrid::new(torus.chart(), &[32, 32]).unwrap();
    let area = grid.volume();
    assert!((area - 2.0 * PI * PI).abs() < 1e-8, "torus area {area}");
    let int_s = grid
        .integrate(|u| Ok(total_s(&point_ops(torus.chart(), u)?.1)))
        .unwrap();
    assert!((int_s - 2.0 * area).abs() < 1e-6);

    let v = veronese().unwrap();
    let area = QuadratureGrid::new(v.chart(), &[64, 64]).unwrap().volume();
    assert!(
        (area - 6.0 * PI).abs() < 1e-6,
        "projective plane area {area}"
    );
}

#[test]
fn non_finite_integrand_names_the_node() {
    let torus = clifford(1, 2).unwrap();
    let grid = QuadratureGrid::new(torus.chart(), &[4, 4]).unwrap();
    match grid.integrate(|u| Ok(if u[0] > 3.0 { f64::NAN } else { 1.0 })) {
        Err(Error::NonFinite { u, .. }) => assert!(u[0] > 3.0),
        other => panic!("expected non-finite error, got {other:?}"),
    }
}

#[test]
fn central_differences_converge_at_second_order() {
    let model = veronese().unwrap();
    let u = [0.7, 0.3];
    let err = |h: f64| {
        let m = model
            .clone()
            .with_fd(FdConfig {
                step: h,
                scheme: FdScheme::Central2,
            })
            .unwrap();
        (total_s(&point_ops(m.chart(), &u).unwrap().1) - 4.0 / 3.0).abs()
    };
    let (e1, e2) = (err(2e-3), err(1e-3));
    assert!(e2 <= 4.0 * e1 * 0.25 + 1e-12, "{e1} -> {e2}");
}

#[derive(Debug)]
struct Bumpy;

impl ChartMap for Bumpy {
    fn dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        5
    }
    fn eval(&self, u: &[f64]) -> Vec<f64> {
        let g = [
            1.0,
            u[0],
            u[1],
            0.3 * u[0] * u[1],
            0.2 * u[0] * u[0] - 0.1 * u[1].powi(3),
        ];
        let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        g.iter().map(|x| x / r).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Normal-valued `H_ab = P⊥ ∂_a∂_b f`, flattened `[a][b][coord]`.
fn projected_hessian(chart: &ImmersionChart, u: &[f64]) -> Vec<f64> {
    use pinch_core::immersion::second_derivatives;
    let fr = frames_at(chart, u, NormalGauge::Pivoted).unwrap();
    let f2 = second_derivatives(chart, u);
    let mut out = Vec::new();
    for row in &f2 {
        for v in row {
            let mut p = vec![0.0; v.len()];
            for xi in &fr.normal {
                let d = dot(v, xi);
                p.iter_mut().zip(xi).for_each(|(o, x)| *o += d * x);
            }
            out.extend(p);
        }
    }
    out
}

#[test]
fn covariant_derivative_matches_projection_formula() {
    use pinch_core::immersion::{christoffels_at, first_derivative};
    let chart = ImmersionChart::new(
        Arc::new(Bumpy),
        vec![Axis::bounded(-1.0, 1.0), Axis::bounded(-1.0, 1.0)],
    )
    .unwrap();
    let u = [0.3, -0.2];
    let pg = point_geometry(&chart, &u).unwrap();
    let big_n = 5;
    let n = 2;
    let fr = &pg.frames;
    let gamma = christoffels_at(&chart, &u).unwrap();
    let h = projected_hessian(&chart, &u);
    let hv = |a: usize, b: usize| &h[(a * n + b) * big_n..(a * n + b + 1) * big_n];
    let fd = *chart.fd();
    let mut max_diff = 0.0f64;
    let mut max_val = 0.0f64;
    for c in 0..n {
        let dh = first_derivative(&|p: &[f64]| projected_hessian(&chart, p), &u, c, &fd);
        for a in 0..n {
            for b in 0..n {
                // coordinate components of (∇_c h)(∂_a, ∂_b) along each ξ_α
                for (alpha, xi) in fr.normal.iter().enumerate() {
                    let mut v = dot(&dh[(a * n + b) * big_n..(a * n + b + 1) * big_n], xi);
                    for d in 0..n {
                        v -=
                            gamma[d][c][a] * dot(hv(d, b), xi) + gamma[d][c][b] * dot(hv(a, d), xi);
                    }
                    // compare after converting the engine's frame components to coordinates
                    let t = |i: usize, a: usize| dot(&fr.tangent[i], &fr.jacobian[a]);
                    let mut eng = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                eng += t(i, a) * t(j, b) * t(k, c) * pg.nabla_h.get(alpha, i, j, k);
                            }
                        }
                    }
                    max_diff = max_diff.max((v - eng).abs());
                    max_val = max_val.max(v.abs());
                }
            }
        }
    }
    assert!(max_val > 1e-2, "test surface should not be parallel");
    assert!(max_diff < 1e-6, "engine vs projection formula: {max_diff}");
    assert!(
        pg.codazzi_defect < 1e-6,
        "codazzi defect {}",
        pg.codazzi_defect
    );
}
