//! Property tests of the matrix calculus.

use prmi_core::hermitian::{
    nonnegative_part_projector, partial_trace, tensor_product, HermitianOperator,
};
use prmi_core::states::{random_density, random_density_seeded, seeded_rng};
use proptest::prelude::*;

fn psd(dim: usize, rank: usize, seed: u64, scale: f64) -> HermitianOperator {
    random_density_seeded(dim, rank, seed).unwrap().op().scale(scale)
}

fn hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = seeded_rng(seed);
    let a = random_density(dim, dim, &mut rng).unwrap();
    let b = random_density(dim, dim, &mut rng).unwrap();
    a.op().sub(b.op())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn power_one_is_identity(seed in any::<u64>(), dim in 1usize..5, rank in 1usize..5) {
        let x = psd(dim, rank.min(dim), seed, 2.5);
        prop_assert!(x.power_on_support(1.0).unwrap().max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn power_round_trip_on_support(seed in any::<u64>(), dim in 2usize..5, rank_off in 0usize..2) {
        let rank = dim - rank_off.min(dim - 1);
        let x = psd(dim, rank, seed, 1.0);
        for p in [0.5, -0.5, 1.0, -1.0, 2.0] {
            let back = x.power_on_support(p).unwrap().power_on_support(1.0 / p).unwrap();
            prop_assert!(back.max_abs_diff(&x) < 1e-8, "p = {}", p);
        }
    }

    #[test]
    fn cs_operator_inequality(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let sq = |x: &HermitianOperator| x.power_on_support(0.5).unwrap();
        let x = psd(da, da, seed, 1.0);
        let x2 = psd(da, 1, seed ^ 1, 2.0);
        let y = psd(db, db, seed ^ 2, 0.5);
        let y2 = psd(db, db, seed ^ 3, 1.5);
        let lhs = sq(&x.add(&x2)).tensor(&sq(&y.add(&y2)));
        let rhs = sq(&x).tensor(&sq(&y)).add(&sq(&x2).tensor(&sq(&y2)));
        prop_assert!(lhs.sub(&rhs).min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let a = hermitian(da, seed);
        let b = psd(db, db, seed ^ 5, 1.7);
        let t = partial_trace(&tensor_product(&a, &b), &[da, db], &[0]).unwrap();
        prop_assert!(t.max_abs_diff(&a.scale(b.trace())) < 1e-12);
    }

    #[test]
    fn projectors_complement(seed in any::<u64>(), dim in 1usize..5) {
        let x = hermitian(dim, seed);
        let y = hermitian(dim, seed ^ 9);
        let ge = nonnegative_part_projector(&x, &y).unwrap();
        // {X < Y} is the complement of {X ≥ Y}.
        let lt = HermitianOperator::identity(dim).sub(&ge);
        let sum = ge.add(&lt);
        prop_assert!(sum.max_abs_diff(&HermitianOperator::identity(dim)) < 1e-12);
        prop_assert!(ge.eigenvalues().iter().all(|&l| l.abs() < 1e-10 || (l - 1.0).abs() < 1e-10));
        let diff = x.sub(&y);
        prop_assert!(ge.sandwich(&diff).min_eigenvalue() >= -1e-12);
        prop_assert!(lt.sandwich(&diff).max_eigenvalue() <= 1e-12);
    }
}
