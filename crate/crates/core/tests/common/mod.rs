#![allow(dead_code)]

use num_complex::Complex64;
use prmi_core::states::{cc_state, pure_bipartite, Pmf};
use prmi_core::BipartiteState;

pub const P: f64 = 0.2;

/// `√p|00⟩ + √(1−p)|11⟩`.
pub fn pure_fixture() -> BipartiteState {
    let c = |x: f64| Complex64::new(x, 0.0);
    pure_bipartite(&[c(P.sqrt()), c(0.0), c(0.0), c((1.0 - P).sqrt())], 2, 2).unwrap()
}

/// `p|00⟩⟨00| + (1−p)|11⟩⟨11|`.
pub fn copy_cc_fixture() -> BipartiteState {
    cc_state(&copy_pmf()).unwrap()
}

pub fn copy_pmf() -> Pmf {
    Pmf::copy_joint(&[P, 1.0 - P]).unwrap()
}

/// Rényi entropy of `(p, 1−p)` computed directly, with the `0`, `1` and `∞`
/// limits spelled out.
pub fn h(alpha: f64) -> f64 {
    let p = [P, 1.0 - P];
    if alpha.is_infinite() {
        return -p.iter().cloned().fold(0.0, f64::max).ln();
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return -p.iter().map(|x| x * x.ln()).sum::<f64>();
    }
    p.iter().map(|x| x.powf(alpha)).sum::<f64>().ln() / (1.0 - alpha)
}

/// `I^{↓↓}_α` of the pure fixture.
pub fn pure_dd(alpha: f64) -> f64 {
    if alpha <= 0.5 {
        h(f64::INFINITY) / (1.0 - alpha)
    } else {
        2.0 * h(1.0 / (2.0 * alpha - 1.0))
    }
}

/// `I^{↓↓}_α` of the copy-CC fixture.
pub fn copy_dd(alpha: f64) -> f64 {
    if alpha <= 0.5 {
        alpha / (1.0 - alpha) * h(f64::INFINITY)
    } else {
        h(alpha / (2.0 * alpha - 1.0))
    }
}

/// `0, 0.1, …, 2.5`.
pub fn alpha_grid() -> Vec<f64> {
    (0..=25).map(|k| k as f64 / 10.0).collect()
}

pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:>2} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}
