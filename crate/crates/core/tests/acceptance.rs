//! Acceptance criteria. Each test prints one PASS/FAIL line.

mod common;

use std::time::Instant;

use common::*;
use prmi_core::classical::{classical_divergence, classical_rmi_down_down, classical_rmi_up_down};
use prmi_core::divergences::{
    mutual_information, mutual_information_variance, petz_divergence, sandwiched_divergence,
};
use prmi_core::exponents::{direct_exponent, g_value, rate_curve, S_MAX, S_MIN};
use prmi_core::hermitian::{geometric_mean, HermitianOperator};
use prmi_core::hypothesis::test_errors;
use prmi_core::oracle::brute_force_dd;
use prmi_core::prmi::{
    prmi_down_down, prmi_up_down, prmi_up_up, prmi_value, solve_iterative, Init, Which,
};
use prmi_core::states::{purify, random_bipartite, random_density, random_density_seeded, seeded_rng};
use prmi_core::{BipartiteState, FixedPointConfig, RenyiOrder};
use rand::Rng;

fn order(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

fn three_curves(state: &BipartiteState, a: f64, cfg: &FixedPointConfig) -> [f64; 3] {
    [
        prmi_up_up(state, order(a)).unwrap().to_f64(),
        prmi_up_down(state, order(a)).unwrap().0.to_f64(),
        prmi_down_down(state, order(a), cfg).unwrap().value,
    ]
}

#[test]
fn criterion_01_pure_state_curves() {
    let start = Instant::now();
    let s = pure_fixture();
    let cfg = FixedPointConfig::default();
    let mut worst = 0.0f64;
    for a in alpha_grid() {
        let got = three_curves(&s, a, &cfg);
        let want = [2.0 * h(3.0 - 2.0 * a), 2.0 * h((2.0 - a) / a), pure_dd(a)];
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    let at_one = three_curves(&s, 1.0, &cfg);
    let one_ok = at_one.iter().all(|v| (v - 2.0 * h(1.0)).abs() < 1e-6 && (v - 1.000805).abs() < 1e-6);
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-6 && one_ok && secs < 5.0;
    report(1, "pure-state curves", pass, &format!("max err {worst:.2e}, {secs:.2}s"));
    assert!(pass);
}

#[test]
fn criterion_02_copy_cc_curves() {
    let start = Instant::now();
    let s = copy_cc_fixture();
    let pmf = copy_pmf();
    let cfg = FixedPointConfig::default();
    let (mut worst, mut worst_cl) = (0.0f64, 0.0f64);
    for a in alpha_grid() {
        let got = three_curves(&s, a, &cfg);
        let want = [h(2.0 - a), h(1.0 / a), copy_dd(a)];
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
        let px = pmf.marginal_x();
        let py = pmf.marginal_y();
        let prod: Vec<f64> = px.iter().flat_map(|x| py.iter().map(move |y| x * y)).collect();
        let cl = [
            classical_divergence(pmf.weights(), &prod, a).unwrap().to_f64(),
            classical_rmi_up_down(&pmf, a).unwrap().0,
            classical_rmi_down_down(&pmf, a, &cfg).unwrap().value,
        ];
        for (g, c) in got.iter().zip(cl) {
            worst_cl = worst_cl.max((g - c).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-6 && worst_cl <= 1e-9 && secs < 5.0;
    report(
        2,
        "copy-CC curves",
        pass,
        &format!("max err {worst:.2e}, quantum/classical {worst_cl:.2e}, {secs:.2}s"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_oracle_equivalence() {
    let start = Instant::now();
    let cfg = FixedPointConfig::default();
    let (mut worst_gap, mut worst_excess) = (0.0f64, f64::NEG_INFINITY);
    for seed in 0..20 {
        let s = random_bipartite(2, 2, 1000 + seed);
        for a in [0.6, 0.75, 0.9] {
            let solver = prmi_down_down(&s, order(a), &cfg).unwrap().value;
            let oracle = brute_force_dd(&s, a, 24).unwrap().value;
            worst_gap = worst_gap.max((solver - oracle).abs());
            worst_excess = worst_excess.max(solver - oracle);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_gap <= 2e-3 && worst_excess <= 1e-6 && secs < 120.0;
    report(
        3,
        "oracle equivalence",
        pass,
        &format!("max |gap| {worst_gap:.2e}, max solver−oracle {worst_excess:.2e}, {secs:.1}s"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_additivity() {
    let start = Instant::now();
    let cfg = FixedPointConfig::default();
    let mut worst = 0.0f64;
    for k in 0..10 {
        let s1 = random_bipartite(2, 2, 2000 + 2 * k);
        let s2 = random_bipartite(2, 2, 2001 + 2 * k);
        let joint = s1.tensor(&s2);
        for a in [0.6, 1.0, 1.5, 2.0] {
            let v = prmi_down_down(&joint, order(a), &cfg).unwrap().value;
            let v1 = prmi_down_down(&s1, order(a), &cfg).unwrap().value;
            let v2 = prmi_down_down(&s2, order(a), &cfg).unwrap().value;
            worst = worst.max((v - v1 - v2).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-7 && secs < 120.0;
    report(4, "additivity", pass, &format!("max defect {worst:.2e}, {secs:.1}s"));
    assert!(pass);
}

#[test]
fn criterion_05_uniqueness() {
    let mut worst_spread = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut certified = 0;
    for k in 0..5 {
        let s = random_bipartite(2, 2, 3000 + k);
        for a in [0.56, 0.7, 0.85, 1.0] {
            let sols: Vec<_> = (0..8)
                .map(|r| {
                    let init = random_density_seeded(2, 2, 77 * k + r).unwrap();
                    let cfg = FixedPointConfig {
                        init: Init::Explicit(init),
                        restarts: Some(1),
                        ..FixedPointConfig::default()
                    };
                    solve_iterative(&s, order(a), &cfg).unwrap()
                })
                .collect();
            for sol in &sols {
                worst_spread = worst_spread.max(sol.sigma_a.trace_distance(&sols[0].sigma_a));
                if sol.certified {
                    certified += 1;
                    worst_residual = worst_residual.max(sol.residual);
                }
            }
        }
    }
    let pass = worst_spread <= 1e-8 && worst_residual <= 1e-10 && certified > 0;
    report(
        5,
        "uniqueness",
        pass,
        &format!("restart spread {worst_spread:.2e}, residual {worst_residual:.2e} over {certified} certified"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_duality() {
    let mut worst = 0.0f64;
    for k in 0..10 {
        let s = random_bipartite(2, 2, 4000 + k);
        let pur = purify(&s);
        let rho_ac = pur.reduced(&[0, 2]).unwrap();
        let rho_a = pur.reduced(&[0]).unwrap();
        let rho_c = pur.reduced(&[2]).unwrap();
        let sigma = rho_a.op().power_on_support(-1.0).unwrap().tensor(rho_c.op());
        for a in [0.5, 0.8, 1.25, 2.0] {
            let ud = prmi_up_down(&s, order(a)).unwrap().0.to_f64();
            let dual = sandwiched_divergence(&rho_ac, &sigma, 1.0 / a).unwrap().to_f64();
            worst = worst.max((ud + dual).abs());
            let uu = prmi_up_up(&s, order(a)).unwrap().to_f64();
            let dual = petz_divergence(&rho_ac, &sigma, order(2.0 - a)).unwrap().to_f64();
            worst = worst.max((uu + dual).abs());
        }
    }
    let pass = worst <= 1e-7;
    report(6, "duality", pass, &format!("max |sum| {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_07_variance_link() {
    let cfg = FixedPointConfig::default();
    let hstep = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..10 {
        let s = random_bipartite(2, 2, 5000 + k);
        let v = mutual_information_variance(&s).unwrap();
        for which in [Which::UpUp, Which::UpDown, Which::DownDown] {
            let f = |a: f64| prmi_value(&s, which, order(a), &cfg).unwrap().unwrap();
            let d = (f(1.0 + hstep) - f(1.0 - hstep)) / (2.0 * hstep);
            worst = worst.max((d - v / 2.0).abs());
        }
    }
    let pass = worst <= 1e-4;
    report(7, "variance link", pass, &format!("max |dI/dα − V/2| {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_08_direct_exponent() {
    let s = copy_cc_fixture();
    let cfg = FixedPointConfig::default();
    let i = mutual_information(&s);
    let above = [i, i + 0.1, 1.0]
        .iter()
        .all(|&r| direct_exponent(&s, r, &cfg).unwrap().exponent == 0.0);
    let rep = direct_exponent(&s, 0.3, &cfg).unwrap();
    let n = 10_000;
    let grid_max = (0..n)
        .map(|k| S_MIN + (S_MAX - S_MIN) * k as f64 / (n - 1) as f64)
        .map(|t| g_value(t, copy_dd(t), 0.3))
        .fold(f64::NEG_INFINITY, f64::max);
    let grid_gap = (rep.exponent - grid_max).abs();
    let curve = rate_curve(&s, &[0.6, 0.7, 0.8, 0.9], &cfg).unwrap();
    let mut round_trip = 0.0f64;
    for pt in &curve {
        let e = direct_exponent(&s, pt.rate, &cfg).unwrap().exponent;
        round_trip = round_trip.max((e - pt.exponent).abs());
    }
    let pass = above && rep.exponent > 0.0 && grid_gap <= 1e-6 && round_trip <= 1e-5;
    report(
        8,
        "direct exponent",
        pass,
        &format!(
            "zero above I: {above}, exponent {:.8}, grid gap {grid_gap:.2e}, round trip {round_trip:.2e}",
            rep.exponent
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_achievability() {
    let states = [copy_cc_fixture(), pure_fixture(), random_bipartite(2, 2, 6000)];
    let (mut worst_two, mut worst_one) = (0.0f64, f64::NEG_INFINITY);
    for s in &states {
        for n in 1..=3 {
            for (r, t) in [(0.3, 0.75), (0.1, 0.6), (0.05, 0.9)] {
                let e = test_errors(s, n, r, t).unwrap();
                let target = (-(n as f64) * r).exp();
                worst_two = worst_two
                    .max((e.type_two_bound - target).abs())
                    .max(e.type_two_direct - target);
                worst_one = worst_one.max(e.type_one - e.alpha_qn_bound);
            }
        }
    }
    let pass = worst_two <= 1e-10 && worst_one <= 1e-10;
    report(
        9,
        "achievability bound",
        pass,
        &format!("type-II deviation {worst_two:.2e}, type-I excess {worst_one:.2e}"),
    );
    assert!(pass);
}

fn random_psd(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let scale: f64 = rng.random_range(0.1..3.0);
    random_density(dim, dim, rng).unwrap().op().scale(scale)
}

fn sqrt_op(x: &HermitianOperator) -> HermitianOperator {
    x.power_on_support(0.5).unwrap()
}

#[test]
fn criterion_10_operator_inequalities() {
    let mut rng = seeded_rng(7000);
    let (mut worst_cs, mut worst_gm) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..100 {
        let (x, x2) = (random_psd(2, &mut rng), random_psd(2, &mut rng));
        let (y, y2) = (random_psd(3, &mut rng), random_psd(3, &mut rng));
        let lhs = sqrt_op(&x.add(&x2)).tensor(&sqrt_op(&y.add(&y2)));
        let rhs = sqrt_op(&x).tensor(&sqrt_op(&y)).add(&sqrt_op(&x2).tensor(&sqrt_op(&y2)));
        worst_cs = worst_cs.min(lhs.sub(&rhs).min_eigenvalue());

        let (u, u2) = (random_psd(3, &mut rng), random_psd(3, &mut rng));
        let (v, v2) = (random_psd(3, &mut rng), random_psd(3, &mut rng));
        let sum = geometric_mean(&u.add(&u2), &v.add(&v2)).unwrap();
        let parts = geometric_mean(&u, &v).unwrap().add(&geometric_mean(&u2, &v2).unwrap());
        worst_gm = worst_gm.min(sum.sub(&parts).min_eigenvalue());
    }
    let mut worst_alt = f64::INFINITY;
    for k in 0..100 {
        let rho = random_density_seeded(3, 1 + (k as usize % 3), 7100 + k).unwrap();
        let sigma = random_density_seeded(3, 3, 7300 + k).unwrap();
        for a in [0.3, 0.7, 1.0, 1.5, 2.2] {
            let petz = petz_divergence(&rho, sigma.op(), order(a)).unwrap().to_f64();
            let sand = sandwiched_divergence(&rho, sigma.op(), a).unwrap().to_f64();
            worst_alt = worst_alt.min(petz - sand);
        }
    }
    let pass = worst_cs >= -1e-9 && worst_gm >= -1e-9 && worst_alt >= -1e-9;
    report(
        10,
        "operator inequalities",
        pass,
        &format!("min eig cs {worst_cs:.2e}, geometric mean {worst_gm:.2e}, petz−sandwiched {worst_alt:.2e}"),
    );
    assert!(pass);
}
