use nalgebra::DMatrix;
use proptest::prelude::*;

use convneg::composition::{compose, diag_comp, fuzz, mult, phaser, spider, BasisSlot, CompositionKind};
use convneg::context::{hypernym_weights, HypernymHierarchy, WeightFunction, WeightKind};
use convneg::entailment::{k_ba, k_e, k_hyp, trace_similarity};
use convneg::experiment::{pearson, GridConfig};
use convneg::lexicon::{build_density_matrix, Lexicon, VectorTable};
use convneg::negation::{neg_inv, neg_ker, neg_sub, neg_supp};
use convneg::spectral::{scale_to_unit_max_eig, spectral_decompose, support_projector, symmetric_eigen, Dmat, RANK_TOL};

fn config() -> ProptestConfig {
    let base = ProptestConfig::default();
    if std::env::var_os("PROPTEST_CASES").is_some() {
        return base;
    }
    ProptestConfig { cases: 64, ..base }
}

/// `G Gᵀ / λ_max` for a random `dim × rank` factor `G`.
fn dmat(dim: usize) -> impl Strategy<Value = Dmat> {
    (1..=dim).prop_flat_map(move |rank| {
        prop::collection::vec(-1.0f64..1.0, dim * rank).prop_filter_map("zero factor", move |v| {
            let g = DMatrix::from_vec(dim, rank, v);
            let m = Dmat::new(&g * g.transpose()).ok()?;
            if m.frobenius_norm() < 1e-3 {
                return None;
            }
            scale_to_unit_max_eig(&m).ok()
        })
    })
}

fn pair() -> impl Strategy<Value = (Dmat, Dmat)> {
    (2usize..=6).prop_flat_map(|d| (dmat(d), dmat(d)))
}

fn single() -> impl Strategy<Value = Dmat> {
    (2usize..=6).prop_flat_map(dmat)
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn psd_residual(m: &Dmat) -> f64 {
    let eig = symmetric_eigen(m.matrix()).unwrap();
    (-eig.min_eigenvalue()).max(0.0)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn decomposition_is_ordered_orthonormal_and_exact(x in single()) {
        let eig = spectral_decompose(&x).unwrap();
        prop_assert!(eig.eigenvalues().windows(2).all(|w| w[0] >= w[1] - 1e-8));
        let v = eig.eigenvectors();
        prop_assert!(close(&(v.transpose() * v), &DMatrix::identity(x.dim(), x.dim()), 1e-10));
        prop_assert!(close(&eig.reconstruct(), x.matrix(), 1e-8));
        for col in v.column_iter() {
            let first = col.iter().find(|c| c.abs() > 1e-10).copied().unwrap();
            prop_assert!(first > 0.0);
        }
    }

    #[test]
    fn support_projector_is_an_idempotent_projector(x in single()) {
        let p = support_projector(&x, RANK_TOL).unwrap();
        prop_assert!(close(&(p.matrix() * p.matrix()), p.matrix(), 1e-10));
        let rank = spectral_decompose(&x).unwrap().rank(RANK_TOL) as f64;
        prop_assert!((p.trace() - rank).abs() < 1e-9);
    }

    #[test]
    fn sub_is_an_involution(x in single()) {
        prop_assert!(close(neg_sub(&neg_sub(&x).unwrap()).unwrap().matrix(), x.matrix(), 1e-10));
    }

    #[test]
    fn supp_twice_returns_the_input(x in single()) {
        let twice = neg_supp(&neg_supp(&x, RANK_TOL).unwrap(), RANK_TOL).unwrap();
        prop_assert!(close(twice.matrix(), x.matrix(), 1e-6 * (1.0 + x.frobenius_norm())));
    }

    #[test]
    fn ker_and_supp_split_the_space(x in single()) {
        let ker = neg_ker(&x, RANK_TOL).unwrap();
        let supp_proj = support_projector(&x, RANK_TOL).unwrap();
        let total = ker.projector.matrix() + supp_proj.matrix();
        prop_assert!(close(&total, &DMatrix::identity(x.dim(), x.dim()), 1e-9));
        prop_assert_eq!(ker.input_invertible, ker.projector.is_zero());
    }

    #[test]
    fn inv_endpoints(x in single()) {
        let supp = neg_supp(&x, RANK_TOL).unwrap();
        let ker = neg_ker(&x, RANK_TOL).unwrap().projector;
        prop_assert!(close(neg_inv(&x, 1.0, RANK_TOL).unwrap().matrix(), supp.matrix(), 1e-12));
        prop_assert!(close(neg_inv(&x, 0.0, RANK_TOL).unwrap().matrix(), ker.matrix(), 1e-12));
    }

    #[test]
    fn compositions_stay_symmetric_psd((a, b) in pair()) {
        for op in [spider, fuzz, phaser, mult, diag_comp] {
            let out = op(&a, &b).unwrap();
            let m = out.matrix();
            prop_assert!((m - m.transpose()).amax() <= 1e-12);
            prop_assert!(psd_residual(&out) <= 1e-9);
        }
    }

    #[test]
    fn slot_chooses_the_structural_operand((a, b) in pair()) {
        for kind in CompositionKind::ALL {
            let first = compose(&a, &b, kind, BasisSlot::FirstOperand).unwrap();
            let second = compose(&a, &b, kind, BasisSlot::SecondOperand).unwrap();
            let swapped = kind.apply(&b, &a).unwrap();
            let direct = kind.apply(&a, &b).unwrap();
            prop_assert_eq!(first.matrix(), swapped.matrix());
            prop_assert_eq!(second.matrix(), direct.matrix());
        }
    }

    #[test]
    fn mult_and_diag_are_symmetric_in_their_operands((a, b) in pair()) {
        prop_assert!(close(mult(&a, &b).unwrap().matrix(), mult(&b, &a).unwrap().matrix(), 1e-15));
        prop_assert!(close(diag_comp(&a, &b).unwrap().matrix(), diag_comp(&b, &a).unwrap().matrix(), 1e-15));
    }

    #[test]
    fn spider_is_mult_for_a_diagonal_structure(
        (a, d) in (2usize..=6).prop_flat_map(|n| (dmat(n), prop::collection::vec(0.0f64..1.0, n)))
    ) {
        let b = Dmat::from_diagonal(&d).unwrap();
        prop_assert!(close(spider(&a, &b).unwrap().matrix(), mult(&a, &b).unwrap().matrix(), 1e-12));
    }

    #[test]
    fn measure_ranges((a, b) in pair()) {
        let kba = k_ba(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&kba));
        let ke = k_e(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ke));
        let t = trace_similarity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert!((t - trace_similarity(&b, &a).unwrap()).abs() < 1e-12);
        if let Ok(k) = k_hyp(&a, &b, RANK_TOL) {
            prop_assert!(k >= 0.0);
        }
    }

    #[test]
    fn k_hyp_scales_inversely((a, b) in pair(), c in 0.1f64..10.0) {
        if let Ok(k) = k_hyp(&a, &b, RANK_TOL) {
            let scaled = k_hyp(&a.scaled(c), &b, RANK_TOL).unwrap();
            prop_assert!((scaled * c - k).abs() <= 1e-8 * k.max(1.0));
        }
    }

    #[test]
    fn k_ba_is_symmetric_under_sub((a, b) in pair()) {
        let lhs = k_ba(&neg_sub(&b).unwrap(), &neg_sub(&a).unwrap()).unwrap();
        prop_assert!((lhs - k_ba(&a, &b).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn unit_scaling_hits_one(x in single(), c in 0.01f64..100.0) {
        let y = scale_to_unit_max_eig(&x.scaled(c)).unwrap();
        prop_assert!((y.max_eigenvalue().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hierarchy_weights_sum_to_one_and_decrease(n in 1usize..10, x in 0.0f64..5.0, exp in any::<bool>()) {
        let path: Vec<String> = (0..n).map(|i| format!("h{i}")).collect();
        let hierarchy = HypernymHierarchy::from_paths([("w", path)]).unwrap();
        let f = WeightFunction::new(if exp { WeightKind::Exp } else { WeightKind::Poly }, x).unwrap();
        let weights = hypernym_weights(f, "w", &hierarchy, &Lexicon::new(2)).unwrap();
        let total: f64 = weights.iter().sum();
        prop_assert!(total == 0.0 || (total - 1.0).abs() < 1e-12);
        prop_assert!(weights.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn density_matrix_ignores_hyponym_order(
        vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..6),
        rotate in 0usize..6,
    ) {
        let words: Vec<String> = (0..vs.len()).map(|i| format!("w{i}")).collect();
        let table = VectorTable::from_pairs(words.iter().cloned().zip(vs.iter().cloned())).unwrap();
        let mut hyponyms: Vec<&str> = words[1..].iter().map(String::as_str).collect();
        let first = build_density_matrix("w0", hyponyms.iter().copied(), &table);
        let k = rotate % hyponyms.len();
        hyponyms.rotate_left(k);
        let second = build_density_matrix("w0", hyponyms.iter().copied(), &table);
        match (first, second) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.matrix(), b.matrix()),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "order changed success"),
        }
    }

    #[test]
    fn lexicon_binary_round_trip_is_bit_exact(xs in prop::collection::vec(dmat(3), 1..5)) {
        let mut lexicon = Lexicon::new(3);
        for (i, x) in xs.into_iter().enumerate() {
            lexicon.insert(format!("wörd{i}"), x).unwrap();
        }
        let mut bytes = Vec::new();
        lexicon.write_binary(&mut bytes).unwrap();
        let back = Lexicon::read_binary(bytes.as_slice()).unwrap();
        prop_assert_eq!(lexicon.len(), back.len());
        for ((w1, m1), (w2, m2)) in lexicon.iter().zip(back.iter()) {
            prop_assert_eq!(w1, w2);
            let same_bits = m1.matrix().iter().zip(m2.matrix().iter()).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same_bits);
        }
    }

    #[test]
    fn pearson_is_bounded_and_affine_invariant(
        data in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
        scale in 0.01f64..100.0,
        shift in -100.0f64..100.0,
    ) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
        if let Ok(r) = pearson(&xs, &ys) {
            prop_assert!((-1.0..=1.0).contains(&r));
            let moved: Vec<f64> = xs.iter().map(|x| x * scale + shift).collect();
            prop_assert!((pearson(&moved, &ys).unwrap() - r).abs() < 1e-9);
            let flipped: Vec<f64> = xs.iter().map(|x| -x).collect();
            prop_assert!((pearson(&flipped, &ys).unwrap() + r).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_has_one_config_per_distinct_recipe(
        negations in prop::sample::subsequence(vec!["sub", "inv"], 1..=2),
        compositions in prop::sample::subsequence(vec!["spider", "fuzz", "phaser", "mult", "diag"], 1..=5),
        bases in prop::sample::subsequence(vec!["w", "c"], 1..=2),
    ) {
        let text = format!(
            "negation = {}\ncomposition = {}\nbasis = {}\ncontext = fixed\n",
            negations.join(","), compositions.join(","), bases.join(",")
        );
        let grid = GridConfig::parse(&text).unwrap();
        let structural = compositions.iter().filter(|c| matches!(**c, "spider" | "fuzz" | "phaser")).count();
        let elementwise = compositions.len() - structural;
        let expected = negations.len() * (structural * bases.len() + elementwise);
        prop_assert_eq!(grid.configs().len(), expected);
    }
}
