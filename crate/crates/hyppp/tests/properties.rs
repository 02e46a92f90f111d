//! Property tests for the algebraic invariants that hold for every factor
//! count: Hermitian pairing of factored arrays, nonnegativity and homogeneity
//! of the expansion, column-permutation invariance, evaluator agreement, and
//! exactness of the moment inversion.

use hyppp::moments::pmf_from_factorial_moments;
use hyppp::oracle::{cofactor_det, naive_permanent};
use hyppp::{
    det, hyperdet_direct, hyperdet_factored, permanent, ComplexMatrix, CountPMF, HypercubicArray,
    SignancySet,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(complex_strategy(), rows * cols).prop_map(move |entries| {
        let mut it = entries.into_iter();
        ComplexMatrix::from_fn(rows, cols, |_, _| it.next().unwrap())
    })
}

fn factors_strategy(m: usize, n: usize, l: usize) -> impl Strategy<Value = Vec<ComplexMatrix>> {
    proptest::collection::vec(matrix_strategy(n, l), m)
}

fn signancy_strategy(m: usize) -> impl Strategy<Value = SignancySet> {
    proptest::collection::btree_set(1..=m, 1..=m)
        .prop_map(move |members| SignancySet::new(m, members).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factored_arrays_are_hermitian_pairs(factors in factors_strategy(2, 2, 3)) {
        let arr = HypercubicArray::from_factored(&factors).unwrap();
        for i1 in 1..=2usize {
            for i2 in 1..=2usize {
                for j1 in 1..=2usize {
                    for j2 in 1..=2usize {
                        let fwd = arr.get(&[i1, i2, j1, j2]).unwrap();
                        let bwd = arr.get(&[j1, j2, i1, i2]).unwrap();
                        prop_assert!((fwd - bwd.conj()).norm() <= 1e-12);
                    }
                }
            }
        }
        for i1 in 1..=2usize {
            for i2 in 1..=2usize {
                prop_assert!(arr.get(&[i1, i2, i1, i2]).unwrap().im.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hyperdet_factored_is_nonnegative(
        factors in factors_strategy(2, 2, 3),
        k in signancy_strategy(2),
    ) {
        prop_assert!(hyperdet_factored(&factors, &k).unwrap() >= 0.0);
    }

    #[test]
    fn hyperdet_factored_scales_with_degree_two_n(
        factors in factors_strategy(2, 2, 3),
        k in signancy_strategy(2),
        scale in complex_strategy(),
    ) {
        let base = hyperdet_factored(&factors, &k).unwrap();
        let scaled = vec![factors[0].scaled(scale), factors[1].clone()];
        let got = hyperdet_factored(&scaled, &k).unwrap();
        let expected = base * scale.norm_sqr().powi(2);
        prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
    }

    #[test]
    fn hyperdet_factored_ignores_common_column_order(
        factors in factors_strategy(2, 2, 4),
        k in signancy_strategy(2),
        perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let base = hyperdet_factored(&factors, &k).unwrap();
        let permuted: Vec<ComplexMatrix> = factors
            .iter()
            .map(|f| {
                ComplexMatrix::from_fn(f.rows(), f.cols(), |r, c| f.get(r, perm[c]))
            })
            .collect();
        let got = hyperdet_factored(&permuted, &k).unwrap();
        prop_assert!((got - base).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn expansion_identity_on_random_factors(
        factors in factors_strategy(2, 2, 3),
        k in signancy_strategy(2),
    ) {
        let arr = HypercubicArray::from_factored(&factors).unwrap();
        let direct = hyperdet_direct(&arr, &k).unwrap();
        let fact = hyperdet_factored(&factors, &k).unwrap();
        prop_assert!((direct - Complex64::new(fact, 0.0)).norm() <= 1e-9 * (1.0 + fact.abs()));
    }

    #[test]
    fn ryser_agrees_with_naive(a in matrix_strategy(4, 4)) {
        let fast = permanent(&a).unwrap();
        let slow = naive_permanent(&a).unwrap();
        prop_assert!((fast - slow).norm() <= 1e-10 * (1.0 + slow.norm()));
    }

    #[test]
    fn lu_det_agrees_with_cofactor(a in matrix_strategy(4, 4)) {
        let fast = det(&a).unwrap();
        let slow = cofactor_det(&a).unwrap();
        prop_assert!((fast - slow).norm() <= 1e-10 * (1.0 + slow.norm()));
    }

    #[test]
    fn moment_inversion_recovers_genuine_laws(
        raw in proptest::collection::vec(0.0..1.0f64, 2..7),
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-3);
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let pmf = CountPMF::new(probs).unwrap();
        let l = pmf.max_count();
        let moments: Vec<f64> = (1..=l).map(|k| pmf.factorial_moment(k)).collect();
        let inverted = pmf_from_factorial_moments(&moments).unwrap();
        prop_assert!(inverted.max_abs_diff(&pmf) <= 1e-9);
    }

    #[test]
    fn json_floats_round_trip(values in proptest::collection::vec(-1e12..1e12f64, 0..8)) {
        let text = hyppp::json::to_json_string(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(values, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_is_exchangeable_under_any_permutation(
        seed in 0..1000u64,
        swap in 0..3usize,
    ) {
        use hyppp::{gen_system, GroundSpace, PointConfig, ProcessSpec, SystemKind};
        let space = GroundSpace::new(
            vec![3, 2],
            vec![vec![1.0, 0.5, 2.0], vec![1.0, 1.5]],
        ).unwrap();
        let sys = gen_system(&space, 2, SystemKind::Haar, seed).unwrap();
        let spec = ProcessSpec::new(sys, SignancySet::new(2, [1]).unwrap()).unwrap();
        let pts = PointConfig::new(2, vec![vec![1, 1], vec![2, 2], vec![3, 1]]).unwrap();
        let perm = match swap {
            0 => vec![1, 0, 2],
            1 => vec![2, 1, 0],
            _ => vec![0, 2, 1],
        };
        let base = spec.density(&pts).unwrap();
        let permuted = spec.density(&pts.permuted(&perm)).unwrap();
        prop_assert!((base - permuted).abs() <= 1e-12);
    }
}
