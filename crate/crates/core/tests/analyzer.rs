use pinch_core::analyzer::{
    analyze, corollary_scan, from_json_bytes, report_emit, AnalyzeOptions, Branch, DeltaSign,
    Format, PinchReport, Tolerances, Verdict, CSV_COLUMNS,
};
use pinch_core::models::{
    clifford, great_sphere, nonminimal_torus, sphere_product, veronese, zoo, Model, ModelKind,
};

fn expected_verdict(model: &Model) -> Verdict {
    match model.kind() {
        ModelKind::GreatSphere => Verdict::GreatSphere,
        ModelKind::Clifford => Verdict::Clifford,
        ModelKind::SphereProduct if model.m() == 1 => Verdict::Clifford,
        ModelKind::SphereProduct => Verdict::SphereProduct,
        ModelKind::Veronese | ModelKind::NonMinimalTorus => Verdict::Unclassified,
    }
}

fn run(model: &Model) -> PinchReport {
    analyze(model, &AnalyzeOptions::default()).unwrap()
}

#[test]
fn zoo_models_are_classified_as_themselves() {
    for model in zoo().unwrap() {
        let r = run(&model);
        assert_eq!(r.verdict, expected_verdict(&model), "{}", model.id());
        assert!(r.all_checks_pass(), "{}: {:?}", model.id(), r.checks);
        assert!(r.minimal, "{}", model.id());
    }
}

#[test]
fn great_sphere_report() {
    let r = run(&great_sphere(2, 2).unwrap());
    assert_eq!(r.verdict, Verdict::GreatSphere);
    assert!(r.hypotheses.thm11_hypothesis && r.hypotheses.thm12_hypothesis);
    assert_eq!(r.first_normal_rank, 0);
    assert!(r.aggregates.s.max <= 1e-8);
    // threshold 1/(n−1) = 1 with ρ⊥ = 0
    assert!((r.corollary.threshold.unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(
        r.corollary.classification_claim.as_deref(),
        Some("great_sphere_or_clifford")
    );
    assert_eq!(r.corollary.branch, Some(Branch::Low));
}

#[test]
fn sphere_product_meets_hypothesis_at_equality() {
    let r = run(&sphere_product(&[1, 1, 2]).unwrap());
    assert_eq!(r.verdict, Verdict::SphereProduct);
    assert_eq!(r.first_normal_rank, 2);
    assert!(r.hypotheses.thm11_hypothesis);
    assert!(r.hypotheses.rho_perp_bound.abs() < 1e-6);
    assert!(!r.hypotheses.thm12_hypothesis, "S = 8 exceeds n = 4");
}

#[test]
fn clifford_corollary_boundary() {
    let r = run(&clifford(1, 2).unwrap());
    let vol = r.quadrature.vol;
    // δ = 4n² vol²
    assert!((r.quadrature.delta - 16.0 * vol * vol).abs() < 1e-6 * vol * vol);
    assert_eq!(r.hypotheses.cor13_delta_sign, DeltaSign::Positive);
    assert!(r.corollary.threshold.unwrap().abs() < 1e-5);
    assert_eq!(r.corollary.branch, Some(Branch::High));
    assert_eq!(r.hypotheses.cor14_hypothesis, Some(true));
}

#[test]
fn veronese_is_outside_the_hypotheses() {
    let r = run(&veronese().unwrap());
    assert_eq!(r.verdict, Verdict::Unclassified);
    assert!(!r.hypotheses.thm11_hypothesis);
    let bound = (2.0 - 2.0 / 3.0) / (2f64.sqrt() * 2.0);
    assert!((r.hypotheses.rho_perp_bound - bound).abs() < 1e-5);
    assert_eq!(r.hypotheses.cor14_hypothesis, Some(false));
    assert!((r.corollary.threshold.unwrap() - 0.187_184_270_002_521_6).abs() < 1e-5);
    assert_eq!(r.corollary.branch, Some(Branch::High));
    assert!(r.corollary.classification_claim.is_none());
    assert!((r.quadrature.vol - 6.0 * std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn nonminimal_control_is_unclassified() {
    let r = run(&nonminimal_torus(0.5).unwrap());
    assert!(!r.minimal);
    assert_eq!(r.verdict, Verdict::Unclassified);
}

#[test]
fn tightening_tolerance_never_turns_a_failing_hypothesis_on() {
    let model = veronese().unwrap();
    let mut prev: Option<(bool, bool)> = None;
    for tol in [1.0, 1e-2, 1e-6, 0.0] {
        let opts = AnalyzeOptions {
            tolerances: Tolerances {
                hypothesis_tol: tol,
                ..Tolerances::default()
            },
            ..AnalyzeOptions::default()
        };
        let r = analyze(&model, &opts).unwrap();
        let now = (r.hypotheses.thm11_hypothesis, r.hypotheses.thm12_hypothesis);
        if let Some(p) = prev {
            assert!(p.0 || !now.0);
            assert!(p.1 || !now.1);
        }
        prev = Some(now);
    }
}

#[test]
fn emission_is_deterministic_and_round_trips() {
    let model = clifford(1, 3).unwrap().with_grid(vec![3, 3, 3]).unwrap();
    let a = run(&model);
    let b = run(&model);
    for format in [Format::Json, Format::Csv, Format::Text] {
        assert_eq!(
            report_emit(&a, format).unwrap(),
            report_emit(&b, format).unwrap()
        );
    }
    let json = report_emit(&a, Format::Json).unwrap();
    let back: PinchReport = from_json_bytes(&json).unwrap();
    assert_eq!(back, a);
    assert_eq!(corollary_scan(&back), a.corollary);
    let text = String::from_utf8(json).unwrap();
    assert!(text.contains("\"provenance\": \"literature\""));

    let csv = String::from_utf8(report_emit(&a, Format::Csv).unwrap()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    assert_eq!(lines.len(), 1 + a.points.len() + 3);
    assert!(lines[lines.len() - 3].starts_with("min,"));
    assert!(lines[lines.len() - 1].starts_with("mean,"));
}
