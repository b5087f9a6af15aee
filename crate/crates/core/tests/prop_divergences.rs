//! Property tests of the Petz and sandwiched divergences.

use num_complex::Complex64;
use prmi_core::divergences::{info_variance, petz_divergence, sandwiched_divergence};
use prmi_core::hermitian::CMatrix;
use prmi_core::states::{random_bipartite, random_density_seeded};
use prmi_core::{BipartiteState, DensityOperator, RenyiOrder};
use proptest::prelude::*;

fn order(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

fn d(rho: &DensityOperator, sigma: &DensityOperator, a: f64) -> f64 {
    petz_divergence(rho, sigma.op(), order(a)).unwrap().to_f64()
}

fn grid() -> Vec<f64> {
    (0..=25).map(|k| k as f64 / 10.0).collect()
}

/// Pinching in the computational basis.
fn pinch(rho: &DensityOperator) -> DensityOperator {
    let diag: Vec<f64> = rho.op().matrix().diagonal().iter().map(|z| z.re).collect();
    DensityOperator::from_diagonal(&diag).unwrap()
}

fn pair(seed: u64, dim: usize, rank: usize) -> (DensityOperator, DensityOperator) {
    (
        random_density_seeded(dim, rank, seed).unwrap(),
        random_density_seeded(dim, dim, seed ^ 0xabc).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn data_processing(seed in any::<u64>(), rank in 1usize..5) {
        let (rho, sigma) = pair(seed, 4, rank);
        let rs = BipartiteState::new(rho.clone(), 2, 2).unwrap();
        let ss = BipartiteState::new(sigma.clone(), 2, 2).unwrap();
        for a in (0..=20).map(|k| k as f64 / 10.0) {
            let full = d(&rho, &sigma, a);
            prop_assert!(full >= d(rs.rho_a(), ss.rho_a(), a) - 1e-9, "partial trace at α={}", a);
            prop_assert!(full >= d(&pinch(&rho), &pinch(&sigma), a) - 1e-9, "pinching at α={}", a);
        }
    }

    #[test]
    fn additivity(seed in any::<u64>(), a in 0.0f64..2.5) {
        let (r1, s1) = pair(seed, 2, 2);
        let (r2, s2) = pair(seed ^ 77, 3, 2);
        let rho = DensityOperator::normalized_unchecked(r1.op().tensor(r2.op()));
        let sigma = DensityOperator::normalized_unchecked(s1.op().tensor(s2.op()));
        let lhs = d(&rho, &sigma, a);
        prop_assert!((lhs - d(&r1, &s1, a) - d(&r2, &s2, a)).abs() < 1e-9);
    }

    #[test]
    fn normalization(seed in any::<u64>(), a in 0.0f64..2.5, c in 0.05f64..20.0) {
        let (rho, sigma) = pair(seed, 3, 2);
        let scaled = petz_divergence(&rho, &sigma.op().scale(c), order(a)).unwrap().to_f64();
        prop_assert!((scaled - (d(&rho, &sigma, a) - c.ln())).abs() < 1e-9);
    }

    #[test]
    fn monotone_and_convex_in_alpha(seed in any::<u64>(), rank in 1usize..4) {
        let (rho, sigma) = pair(seed, 3, rank);
        let g = grid();
        let v: Vec<f64> = g.iter().map(|&a| d(&rho, &sigma, a)).collect();
        for w in v.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
        let f: Vec<f64> = g.iter().zip(&v).map(|(a, x)| (a - 1.0) * x).collect();
        for w in f.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
        }
    }

    #[test]
    fn alt_ordering(seed in any::<u64>(), rank in 1usize..4, a in 0.05f64..2.5) {
        let (rho, sigma) = pair(seed, 3, rank);
        let q = |v: f64| ((a - 1.0) * v).exp();
        let petz = q(d(&rho, &sigma, a));
        let sand = q(sandwiched_divergence(&rho, sigma.op(), a).unwrap().to_f64());
        if a <= 1.0 {
            prop_assert!(sand >= petz - 1e-10);
        } else {
            prop_assert!(sand <= petz + 1e-10);
        }
    }

    #[test]
    fn derivative_at_one(seed in any::<u64>(), rank in 1usize..4) {
        let (rho, sigma) = pair(seed, 3, rank);
        let h = 1e-4;
        let fd = (d(&rho, &sigma, 1.0 + h) - d(&rho, &sigma, 1.0 - h)) / (2.0 * h);
        let v = info_variance(&rho, sigma.op()).unwrap();
        prop_assert!((fd - v / 2.0).abs() < 1e-5, "fd {} V/2 {}", fd, v / 2.0);
    }
}

#[test]
fn rotated_pinching_also_contracts() {
    let s = random_bipartite(2, 2, 3);
    let rho = s.rho_ab();
    let sigma = random_density_seeded(4, 4, 4).unwrap();
    let h = 0.5f64.sqrt();
    let u = CMatrix::from_fn(4, 4, |i, j| {
        let sign = if i >= 2 && j >= 2 { -1.0 } else { 1.0 };
        if i % 2 == j % 2 { Complex64::new(sign * h, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    let rot = |x: &DensityOperator| DensityOperator::from_matrix(&u * x.op().matrix() * u.adjoint()).unwrap();
    for a in [0.3, 0.9, 1.7] {
        let full = d(rho, &sigma, a);
        let pinched = d(&pinch(&rot(rho)), &pinch(&rot(&sigma)), a);
        assert!(full >= pinched - 1e-9);
    }
}
