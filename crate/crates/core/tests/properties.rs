use proptest::prelude::*;

use pinch_core::analyzer::{fmt_f64, from_json_bytes, to_json_bytes};
use pinch_core::ineq::{
    bw_terms, cor14_threshold, ddvv_terms, lemma32_terms, lemma34_terms, simons_balance,
    thm11_bound,
};
use pinch_core::matcore::random::{random_gen, random_ops, random_orthogonal, sample_rng};
use pinch_core::matcore::{
    commutator, gram, lambda_spectrum, rho_perp, rho_perp0, rotate_normal, rotate_tangent, total_s,
    GenMat, ShapeOperatorSet, SymMat,
};
use pinch_core::models::SimplexGram;

fn sym_from(n: usize, entries: &[f64]) -> SymMat {
    let mut a = SymMat::zeros(n);
    let mut it = entries.iter();
    for i in 0..n {
        for j in 0..=i {
            a.set(i, j, *it.next().unwrap());
        }
    }
    a
}

fn sym_tuple() -> impl Strategy<Value = Vec<SymMat>> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(n, m)| {
        let len = n * (n + 1) / 2;
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, len), m),
            Just(n),
        )
            .prop_map(|(rows, n)| rows.iter().map(|e| sym_from(n, e)).collect())
    })
}

fn square_pair() -> impl Strategy<Value = (GenMat, GenMat)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n * n),
            prop::collection::vec(-10.0f64..10.0, n * n),
        )
            .prop_map(move |(a, b)| {
                (
                    GenMat::from_row_major(n, n, a).unwrap(),
                    GenMat::from_row_major(n, n, b).unwrap(),
                )
            })
    })
}

fn ops_strategy() -> impl Strategy<Value = ShapeOperatorSet> {
    (2usize..=5, 1usize..=4, any::<u64>())
        .prop_map(|(n, m, seed)| random_ops(n, m, &mut sample_rng(seed, 0)))
}

fn lambda1(ops: &ShapeOperatorSet) -> f64 {
    lambda_spectrum(&gram(ops)).unwrap().lambda1()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ddvv_gap_is_nonnegative(bs in sym_tuple()) {
        let t = ddvv_terms(&bs).unwrap();
        prop_assert!(t.normalized() >= -1e-12, "normalized gap {}", t.normalized());
    }

    #[test]
    fn bw_gap_is_nonnegative((x, y) in square_pair()) {
        let t = bw_terms(&x, &y).unwrap();
        prop_assert!(t.normalized() >= -1e-12, "normalized gap {}", t.normalized());
    }

    #[test]
    fn bw_gap_is_quartic_homogeneous((x, y) in square_pair(), t in 0.1f64..10.0) {
        let base = bw_terms(&x, &y).unwrap();
        let scaled = bw_terms(&x.scaled(t), &y.scaled(1.0)).unwrap();
        let expect = base.gap() * t * t;
        prop_assert!((scaled.gap() - expect).abs() <= 1e-9 * (base.large.abs() * t * t + 1.0));
    }

    #[test]
    fn lemma_gaps_are_nonnegative(ops in ops_strategy()) {
        prop_assert!(lemma32_terms(&ops).unwrap().normalized() >= -1e-12);
        prop_assert!(lemma34_terms(&ops).normalized() >= -1e-12);
    }

    #[test]
    fn invariants_do_not_depend_on_frames(ops in ops_strategy(), seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 1);
        let q = random_orthogonal(ops.n(), &mut rng);
        let o = random_orthogonal(ops.m(), &mut rng);
        let moved = rotate_normal(&rotate_tangent(&ops, &q).unwrap(), &o).unwrap();
        let n = ops.n();
        for (a, b) in [
            (total_s(&ops), total_s(&moved)),
            (lambda1(&ops), lambda1(&moved)),
            (rho_perp0(&ops), rho_perp0(&moved)),
            (rho_perp(&ops, n).unwrap(), rho_perp(&moved, n).unwrap()),
            (simons_balance(&ops, n), simons_balance(&moved, n)),
        ] {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn rho_perp0_is_sum_of_commutator_norms(ops in ops_strategy()) {
        let mut sum = 0.0;
        for a in ops.ops() {
            for b in ops.ops() {
                sum += commutator(a.as_gen(), b.as_gen()).unwrap().frob_norm2();
            }
        }
        prop_assert!((rho_perp0(&ops) - sum).abs() <= 1e-10 * (1.0 + sum));
    }

    #[test]
    fn lambda1_lies_between_mean_and_total(ops in ops_strategy()) {
        let s = total_s(&ops);
        let l = lambda1(&ops);
        prop_assert!(l <= s * (1.0 + 1e-12) + 1e-12);
        prop_assert!(l >= s / ops.m() as f64 * (1.0 - 1e-12) - 1e-12);
    }

    #[test]
    fn constant_s_threshold_sign_tracks_s_below_n(n in 2usize..=8, s in 0.0f64..20.0) {
        let nf = n as f64;
        prop_assume!((s - nf).abs() > 1e-6);
        prop_assert_eq!(cor14_threshold(s, n) >= 0.0, s <= nf);
    }

    #[test]
    fn lambda1_bound_is_linear_and_vanishes_at_n(n in 2usize..=8, gap in 0.0f64..10.0) {
        prop_assert_eq!(thm11_bound(0.0, n), 0.0);
        let b = thm11_bound(gap, n);
        prop_assert!(b >= 0.0);
        prop_assert!((thm11_bound(2.0 * gap, n) - 2.0 * b).abs() <= 1e-15 * (1.0 + b));
    }

    #[test]
    fn simplex_gram_relations_hold(partition in prop::collection::vec(1usize..=4, 2..=5)) {
        let sg = SimplexGram::new(&partition).unwrap();
        prop_assert!(sg.relations_defect() <= 1e-10, "defect {}", sg.relations_defect());
        let ops = sg.shape_operators().unwrap();
        let n = partition.iter().sum::<usize>() as f64;
        let k = partition.len() as f64;
        // the Gram matrix of the operators is n times the identity
        prop_assert!((total_s(&ops) - (k - 1.0) * n).abs() <= 1e-9 * n * k);
        prop_assert!((lambda1(&ops) - n).abs() <= 1e-9 * n);
        prop_assert!(rho_perp0(&ops) <= 1e-20);
        prop_assert!(ops.max_abs_trace() <= 1e-10);
        prop_assert!(simons_balance(&ops, partition.iter().sum()).abs() <= 1e-9 * n * n * k);
    }

    #[test]
    fn floats_survive_json(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        let back: Vec<f64> = from_json_bytes(&to_json_bytes(&vec![v]).unwrap()).unwrap();
        prop_assert_eq!(back[0].to_bits(), v.to_bits());
    }

    #[test]
    fn seeded_sampling_is_reproducible(seed in any::<u64>(), index in any::<u64>()) {
        let a = random_gen(3, 3, &mut sample_rng(seed, index));
        let b = random_gen(3, 3, &mut sample_rng(seed, index));
        prop_assert_eq!(a, b);
    }
}
