//! Property tests of state constructors.

use prmi_core::states::{cc_state, purify, random_bipartite, random_density_seeded, BipartiteState, Pmf};
use prmi_core::DensityOperator;
use proptest::prelude::*;

fn is_density(rho: &DensityOperator) -> bool {
    (rho.op().trace() - 1.0).abs() < 1e-10 && rho.op().min_eigenvalue() >= -1e-10
}

fn joint_table() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..4, 1usize..4).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, c), r)
            .prop_filter("nonzero mass", |t| t.iter().flatten().sum::<f64>() > 1e-3)
            .prop_map(|t| {
                let s: f64 = t.iter().flatten().sum();
                t.into_iter().map(|row| row.into_iter().map(|x| x / s).collect()).collect()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn constructors_give_states(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, rank in 1usize..10) {
        let s = random_bipartite(da, db, seed);
        prop_assert!(is_density(s.rho_ab()) && is_density(s.rho_a()) && is_density(s.rho_b()));
        let r = random_density_seeded(da * db, rank.min(da * db), seed).unwrap();
        prop_assert!(is_density(&r));
        let b = BipartiteState::new(r, da, db).unwrap();
        prop_assert!(is_density(b.rho_a()));
    }

    #[test]
    fn cc_marginals(table in joint_table()) {
        let pmf = Pmf::joint(&table).unwrap();
        let s = cc_state(&pmf).unwrap();
        prop_assert!(is_density(s.rho_ab()));
        for (m, want) in [(s.rho_a(), pmf.marginal_x()), (s.rho_b(), pmf.marginal_y())] {
            let mat = m.op().matrix();
            for i in 0..want.len() {
                for j in 0..want.len() {
                    let expect = if i == j { want[i] } else { 0.0 };
                    prop_assert!((mat[(i, j)].re - expect).abs() < 1e-12 && mat[(i, j)].im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn purification_round_trip(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, rank in 1usize..10) {
        let r = random_density_seeded(da * db, rank.min(da * db), seed).unwrap();
        let s = BipartiteState::new(r, da, db).unwrap();
        let back = purify(&s).reduced(&[0, 1]).unwrap();
        let diff = back.op().matrix() - s.rho_ab().op().matrix();
        prop_assert!(diff.norm() < 1e-10);
    }
}
