//! Binary state discrimination at desk scale: the symmetric-subspace
//! projector, the universal permutation-invariant state, Neyman–Pearson
//! projectors and the achievability test built from them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::{petz_divergence, RenyiOrder};
use crate::error::{Error, Result};
use crate::exponents::direct_exponent;
use crate::hermitian::{nonnegative_projector, threshold_projector, trace_product, CMatrix, HermitianOperator};
use crate::prmi::FixedPointConfig;
use crate::states::{BipartiteState, DensityOperator};

/// Largest `(d²)^n` accepted by [`universal_state`].
pub const MAX_SYM_DIM: usize = 6561;
/// Largest `(d_A d_B)^n` accepted by [`test_errors`].
pub const MAX_TEST_DIM: usize = 1024;
pub const MAX_COPIES: usize = 4;
/// Number of interior points of the `s` grid of the sweep.
pub const SWEEP_GRID: usize = 20;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

pub fn cycle_count(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
        }
    }
    cycles
}

pub fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Digits of `index` in base `d`, most significant first.
fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn undigits(ds: impl Iterator<Item = usize>, d: usize) -> usize {
    ds.fold(0, |acc, x| acc * d + x)
}

/// Image of the basis index under the permutation unitary that moves
/// tensor factor `k` to position `perm[k]`.
fn permuted_index(index: usize, d: usize, perm: &[usize]) -> usize {
    let src = digits(index, d, perm.len());
    let mut dst = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        dst[p] = src[k];
    }
    undigits(dst.into_iter(), d)
}

/// Permutation unitary on `(C^d)^{⊗n}` moving factor `k` to `perm[k]`.
pub fn permutation_unitary(d: usize, perm: &[usize]) -> CMatrix {
    let dim = d.pow(perm.len() as u32);
    let mut u = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        u[(permuted_index(i, d, perm), i)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Projector onto the symmetric subspace of `(C^d)^{⊗n}`.
pub fn symmetric_projector(n: usize, d: usize) -> Result<HermitianOperator> {
    let dim = d.checked_pow(n as u32).filter(|&x| x <= MAX_TEST_DIM).ok_or_else(|| {
        Error::ResourceLimit(format!("symmetric projector on {d}^{n} exceeds {MAX_TEST_DIM}"))
    })?;
    let perms = permutations(n);
    let w = 1.0 / perms.len() as f64;
    let mut p = CMatrix::zeros(dim, dim);
    for perm in &perms {
        for i in 0..dim {
            p[(permuted_index(i, d, perm), i)] += Complex64::new(w, 0.0);
        }
    }
    Ok(HermitianOperator::from_matrix_unchecked(p))
}

#[derive(Debug, Clone)]
pub struct UniversalState {
    pub n: usize,
    pub d: usize,
    /// Dimension of the symmetric subspace of `(C^d ⊗ C^d)^{⊗n}`.
    pub g: u64,
    pub omega: DensityOperator,
}

/// `ω = tr_{A'^n}[P_sym] / g` with `P_sym` the symmetric projector on
/// `(A A')^{⊗n}`, averaged over the `n!` permutation unitaries.
///
/// Permutation unitaries are permutation matrices, so the average and the
/// partial trace are accumulated entry by entry without forming `P_sym`.
pub fn universal_state(n: usize, d: usize) -> Result<UniversalState> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("copies and dimension must be positive".into()));
    }
    if n > MAX_COPIES {
        return Err(Error::ResourceLimit(format!("at most {MAX_COPIES} copies, got {n}")));
    }
    let d2 = d * d;
    let full = d2
        .checked_pow(n as u32)
        .filter(|&x| x <= MAX_SYM_DIM)
        .ok_or_else(|| Error::ResourceLimit(format!("(d²)^n exceeds {MAX_SYM_DIM} for d={d}, n={n}")))?;
    let g = binomial(n + d2 - 1, n);
    let perms = permutations(n);
    let dim = d.pow(n as u32);
    // Split a joint index over (A A')^n into its A^n and A'^n parts.
    let split = |index: usize| -> (usize, usize) {
        let ds = digits(index, d2, n);
        (
            undigits(ds.iter().map(|x| x / d), d),
            undigits(ds.iter().map(|x| x % d), d),
        )
    };
    let w = 1.0 / (perms.len() as f64 * g as f64);
    let mut omega = CMatrix::zeros(dim, dim);
    for perm in &perms {
        for i in 0..full {
            let j = permuted_index(i, d2, perm);
            let (a_i, p_i) = split(i);
            let (a_j, p_j) = split(j);
            if p_i == p_j {
                omega[(a_j, a_i)] += Complex64::new(w, 0.0);
            }
        }
    }
    let omega = DensityOperator::normalized_unchecked(HermitianOperator::from_matrix_unchecked(omega));
    Ok(UniversalState { n, d, g, omega })
}

/// `{null ≥ e^{threshold} alt}`.
pub fn np_test(null: &HermitianOperator, alt: &HermitianOperator, threshold: f64) -> Result<HermitianOperator> {
    if null.dim() != alt.dim() {
        return Err(Error::DimensionMismatch {
            expected: null.dim(),
            actual: alt.dim(),
        });
    }
    if threshold.is_nan() {
        return Err(Error::InvalidInput("threshold is NaN".into()));
    }
    Ok(threshold_projector(null, alt, threshold))
}

#[derive(Debug, Clone, Serialize)]
pub struct TestErrors {
    pub n: usize,
    pub s: f64,
    /// `tr[ρ^{⊗n}(1 − T)]`.
    pub type_one: f64,
    /// `g_A g_B tr[(ω_A ⊗ ω_B) T]`.
    pub type_two_direct: f64,
    /// `g_A g_B e^{−sλ} tr[(ρ^{⊗n})^s (ω_A ⊗ ω_B)^{1−s}]`, equal to `e^{−nR}`.
    pub type_two_bound: f64,
    /// `exp(((1−s)/s)(ln g_A + ln g_B + nR − D_s(ρ^{⊗n} ‖ ω_A ⊗ ω_B)))`.
    pub alpha_qn_bound: f64,
    pub lambda: f64,
    pub divergence: f64,
}

/// `ρ^{⊗n}` with its factors regrouped as `A^n B^n`.
pub fn tensor_power_grouped(state: &BipartiteState, n: usize) -> Result<HermitianOperator> {
    let rho = state.rho_ab().op();
    let mut acc = rho.clone();
    for _ in 1..n {
        acc = acc.tensor(rho);
    }
    let dims: Vec<usize> = (0..n).flat_map(|_| [state.d_a(), state.d_b()]).collect();
    let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
    acc.permute(&dims, &perm)
}

fn check_test_size(state: &BipartiteState, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one copy".into()));
    }
    let ok = (state.d_a() * state.d_b())
        .checked_pow(n as u32)
        .is_some_and(|x| x <= MAX_TEST_DIM);
    if !ok {
        return Err(Error::ResourceLimit(format!(
            "(d_A d_B)^n exceeds {MAX_TEST_DIM} for n={n}"
        )));
    }
    Ok(())
}

/// Error functionals of `T = {ρ^{⊗n} ≥ e^λ ω_A ⊗ ω_B}` with
/// `λ = (1/s)(ln g_A + ln g_B + nR − (1−s) D_s(ρ^{⊗n} ‖ ω_A ⊗ ω_B))`.
pub fn test_errors(state: &BipartiteState, n: usize, rate_r: f64, s: f64) -> Result<TestErrors> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s must lie in (0, 1), got {s}")));
    }
    if !rate_r.is_finite() {
        return Err(Error::InvalidInput(format!("rate must be finite, got {rate_r}")));
    }
    check_test_size(state, n)?;
    let ua = universal_state(n, state.d_a())?;
    let ub = universal_state(n, state.d_b())?;
    let rho_n = DensityOperator::normalized_unchecked(tensor_power_grouped(state, n)?);
    let omega = ua.omega.op().tensor(ub.omega.op());
    let log_g = (ua.g as f64).ln() + (ub.g as f64).ln();
    let nr = n as f64 * rate_r;
    let div = petz_divergence(&rho_n, &omega, RenyiOrder::new(s)?)?;
    let (d_s, q_s) = match div {
        crate::divergences::DivergenceValue::Finite { value, q } => (value, q.unwrap_or((-(1.0 - s) * value).exp())),
        _ => return Err(Error::Domain("universal state does not dominate ρ^{⊗n}".into())),
    };
    let lambda = (log_g + nr - (1.0 - s) * d_s) / s;
    let t = np_test(rho_n.op(), &omega, lambda)?;
    let type_one = (1.0 - rho_n.op().inner(&t)).clamp(0.0, 1.0);
    let type_two_direct = log_g.exp() * trace_product(omega.matrix(), t.matrix()).max(0.0);
    let type_two_bound = (log_g - s * lambda + q_s.ln()).exp();
    let alpha_qn_bound = ((1.0 - s) / s * (log_g + nr - d_s)).exp();
    Ok(TestErrors {
        n,
        s,
        type_one,
        type_two_direct,
        type_two_bound,
        alpha_qn_bound,
        lambda,
        divergence: d_s,
    })
}

/// `s_i = i / (SWEEP_GRID + 1)` for `i = 1..=SWEEP_GRID`.
pub fn sweep_grid() -> Vec<f64> {
    (1..=SWEEP_GRID).map(|i| i as f64 / (SWEEP_GRID + 1) as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub s_best: f64,
    /// `−(1/n) ln type_one` at the best grid point.
    pub exponent: f64,
    pub errors: TestErrors,
}

#[derive(Debug, Clone, Serialize)]
pub struct AchievabilityReport {
    pub rate_r: f64,
    pub rows: Vec<SweepRow>,
    /// `sup_{s∈(1/2,1)} ((1−s)/s)(I_s^{↓↓} − R)`.
    pub target: f64,
}

fn per_copy_exponent(type_one: f64, n: usize) -> f64 {
    0.0 - type_one.ln() / n as f64
}

/// Best test over the `s` grid for each `n = 1..=n_max`.
pub fn achievability_sweep(
    state: &BipartiteState,
    rate_r: f64,
    n_max: usize,
    config: &FixedPointConfig,
) -> Result<AchievabilityReport> {
    if n_max == 0 || n_max > MAX_COPIES {
        return Err(Error::ResourceLimit(format!("n_max must be in 1..={MAX_COPIES}, got {n_max}")));
    }
    check_test_size(state, n_max)?;
    let grid = sweep_grid();
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let all = grid
                .par_iter()
                .map(|&s| test_errors(state, n, rate_r, s))
                .collect::<Result<Vec<_>>>()?;
            let best = all
                .into_iter()
                .min_by(|a, b| a.type_one.total_cmp(&b.type_one))
                .expect("grid is nonempty");
            Ok(SweepRow {
                n,
                s_best: best.s,
                exponent: per_copy_exponent(best.type_one, n),
                errors: best,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let target = direct_exponent(state, rate_r, config)?.exponent;
    Ok(AchievabilityReport { rate_r, rows, target })
}

/// Smallest type-I error of a randomized test with type-II error at most
/// `mu`, via `sup_{c ≥ 0} (1 − cμ − tr[(ρ − cσ)_+])`.
pub fn np_tradeoff(null: &HermitianOperator, alt: &HermitianOperator, mu: f64) -> Result<f64> {
    if null.dim() != alt.dim() {
        return Err(Error::DimensionMismatch {
            expected: null.dim(),
            actual: alt.dim(),
        });
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("type-II level must lie in [0, 1], got {mu}")));
    }
    let phi = |c: f64| {
        let diff = null.sub(&alt.scale(c));
        let pos = nonnegative_projector(&diff);
        1.0 - c * mu - diff.inner(&pos)
    };
    let hi = if mu > 0.0 { 1.0 / mu } else { 1e6 };
    // φ is concave; golden section on [0, hi].
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    for _ in 0..200 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi(x2);
        }
    }
    Ok([phi(0.0), f1, f2, phi(hi)].into_iter().fold(f64::NEG_INFINITY, f64::max).clamp(0.0, 1.0))
}
