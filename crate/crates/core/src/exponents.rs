//! α-derivatives of the doubly minimized mutual information, the threshold
//! rate `R_{1/2}`, the direct exponent `sup_s ((1−s)/s)(I_s − R)` and the
//! parametric rate curve.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::{mutual_information, mutual_information_variance, RenyiOrder, ONE_WINDOW};
use crate::error::{Error, Result};
use crate::hermitian::trace_product;
use crate::prmi::{closed_form_kind, prmi_down_down, FixedPointConfig, SolverRoute};
use crate::states::{classify, BipartiteState, StateKind};

/// Central-difference step of the finite-difference derivative.
pub const FD_STEP: f64 = 1e-5;
/// One-sided steps of the right-derivative at `s = 1/2`.
pub const HALF_STEPS: [f64; 2] = [1e-3, 2e-3];
/// Search interval of the direct exponent.
pub const S_MIN: f64 = 0.5 + 1e-4;
pub const S_MAX: f64 = 1.0 - 1e-4;
pub const GOLDEN_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMethod {
    Envelope,
    FiniteDiff,
}

fn dd(state: &BipartiteState, alpha: f64, config: &FixedPointConfig) -> Result<f64> {
    Ok(prmi_down_down(state, RenyiOrder::new(alpha)?, config)?.value)
}

/// `∂/∂α I^{↓↓}_α` for `α ∈ (1/2, 2)`.
///
/// The envelope method differentiates `D_α(ρ ‖ σ̂ ⊗ τ̂)` in α with the
/// minimizer held fixed; the finite-difference method uses a central
/// difference of the solver output.
pub fn alpha_derivative(
    state: &BipartiteState,
    alpha: f64,
    method: DerivativeMethod,
    config: &FixedPointConfig,
) -> Result<f64> {
    if !(alpha > 0.5 && alpha < 2.0) {
        return Err(Error::Domain(format!("derivative needs α ∈ (1/2, 2), got {alpha}")));
    }
    match method {
        DerivativeMethod::FiniteDiff => {
            let up = dd(state, alpha + FD_STEP, config)?;
            let down = dd(state, alpha - FD_STEP, config)?;
            Ok((up - down) / (2.0 * FD_STEP))
        }
        DerivativeMethod::Envelope => {
            if (alpha - 1.0).abs() < ONE_WINDOW {
                return Ok(0.5 * mutual_information_variance(state)?);
            }
            let sol = prmi_down_down(state, RenyiOrder::new(alpha)?, config)?;
            envelope_derivative(state, &sol.sigma_a, &sol.tau_b, alpha)
        }
    }
}

/// `d/dα [(1/(α−1)) ln Q_α]` with `Q_α = tr[ρ^α (σ⊗τ)^{1−α}]` at fixed `σ, τ`.
pub fn envelope_derivative(
    state: &BipartiteState,
    sigma: &crate::states::DensityOperator,
    tau: &crate::states::DensityOperator,
    alpha: f64,
) -> Result<f64> {
    let rho = state.rho_ab().op();
    let rho_a = rho.power_on_support(alpha)?;
    let rho_a_ln = rho.power_log_on_support(alpha)?;
    let b = 1.0 - alpha;
    let sp = sigma.op().power_on_support(b)?;
    let tp = tau.op().power_on_support(b)?;
    let sl = sigma.op().power_log_on_support(b)?;
    let tl = tau.op().power_log_on_support(b)?;
    let x = sp.tensor(&tp);
    let x_ln = sl.tensor(&tp).add(&sp.tensor(&tl));
    let q = trace_product(rho_a.matrix(), x.matrix());
    if !(q > 0.0) {
        return Err(Error::Domain("objective is infinite at the given pair".into()));
    }
    let dq = trace_product(rho_a_ln.matrix(), x.matrix()) - trace_product(rho_a.matrix(), x_ln.matrix());
    let am1 = alpha - 1.0;
    Ok(dq / (am1 * q) - q.ln() / (am1 * am1))
}

#[derive(Debug, Clone, Serialize)]
pub struct RHalf {
    pub value: f64,
    pub i_half: f64,
    pub right_derivative: f64,
    /// `I^{↓↓}_0` when computable.
    pub i_zero: Option<f64>,
    pub clamped: bool,
}

/// `R_{1/2} = I_{1/2} − ¼ ∂⁺_s I_s |_{s=1/2}`, clamped into `[I_0, I_{1/2}]`.
///
/// `I_{1/2}` comes from the closed form for product, pure, copy-CC and
/// AC-independent states and otherwise from quadratic extrapolation of
/// solver values from the right. The right-derivative is a Richardson
/// combination of one-sided differences at `1/2 + 1e-3` and `1/2 + 2e-3`.
pub fn r_half(state: &BipartiteState, config: &FixedPointConfig) -> Result<RHalf> {
    let kind = classify(state);
    let i_at = |a: f64| dd(state, a, config);
    let exact_half = kind == StateKind::Product || closed_form_kind(kind).is_some();
    let i_half = if exact_half {
        i_at(0.5)?
    } else {
        let (i1, i2, i3) = (i_at(0.501)?, i_at(0.502)?, i_at(0.503)?);
        3.0 * i1 - 3.0 * i2 + i3
    };
    let d1 = (i_at(0.5 + HALF_STEPS[0])? - i_half) / HALF_STEPS[0];
    let d2 = (i_at(0.5 + HALF_STEPS[1])? - i_half) / HALF_STEPS[1];
    let right_derivative = 2.0 * d1 - d2;
    let i_zero = match prmi_down_down(state, RenyiOrder::new(0.0)?, config) {
        Ok(sol) => Some(sol.value),
        Err(Error::UnsupportedRegime(_)) => None,
        Err(e) => return Err(e),
    };
    let raw = i_half - 0.25 * right_derivative;
    let lo = i_zero.unwrap_or(0.0).min(i_half);
    let value = raw.clamp(lo, i_half);
    Ok(RHalf {
        value,
        i_half,
        right_derivative,
        i_zero,
        clamped: value != raw,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub i_s: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub rate_r: f64,
    pub s_star: f64,
    pub exponent: f64,
    pub r_half: f64,
    pub mutual_info: f64,
    /// `R > R_{1/2}`: the single-letter formula is asserted for this rate.
    pub in_scope: bool,
    pub curve: Vec<CurveSample>,
}

/// Write-once cache of `I_s^{↓↓}` keyed by `s`.
pub struct CurveCache<'a> {
    state: &'a BipartiteState,
    config: &'a FixedPointConfig,
    values: Mutex<BTreeMap<u64, f64>>,
}

impl<'a> CurveCache<'a> {
    pub fn new(state: &'a BipartiteState, config: &'a FixedPointConfig) -> Self {
        Self {
            state,
            config,
            values: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn get(&self, s: f64) -> Result<f64> {
        if let Some(v) = self.values.lock().expect("cache lock").get(&s.to_bits()) {
            return Ok(*v);
        }
        let v = dd(self.state, s, self.config)?;
        self.values.lock().expect("cache lock").entry(s.to_bits()).or_insert(v);
        Ok(v)
    }

    /// Evaluates many points concurrently.
    pub fn fill(&self, ss: &[f64]) -> Result<()> {
        ss.par_iter().map(|&s| self.get(s).map(|_| ())).collect()
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.values
            .lock()
            .expect("cache lock")
            .iter()
            .map(|(k, v)| (f64::from_bits(*k), *v))
            .collect()
    }
}

/// `g(s) = ((1−s)/s)(I_s − R)`.
pub fn g_value(s: f64, i_s: f64, rate: f64) -> f64 {
    (1.0 - s) / s * (i_s - rate)
}

/// Golden-section maximization of `g` on `[S_MIN, S_MAX]`; returns the best
/// evaluated `(s, g)`.
fn golden_max(f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (S_MIN, S_MAX);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    for x in [S_MIN, S_MAX] {
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `sup_{s∈(1/2,1)} ((1−s)/s)(I_s^{↓↓} − R)`, exactly 0 when `R ≥ I(A:B)`.
pub fn direct_exponent(state: &BipartiteState, rate_r: f64, config: &FixedPointConfig) -> Result<ExponentReport> {
    if !rate_r.is_finite() {
        return Err(Error::InvalidInput(format!("rate must be finite, got {rate_r}")));
    }
    let mutual_info = mutual_information(state);
    let rh = r_half(state, config)?;
    let in_scope = rate_r > rh.value;
    let cache = CurveCache::new(state, config);
    let (s_star, exponent) = if rate_r >= mutual_info {
        (S_MAX, 0.0)
    } else {
        let (s, g) = golden_max(|s| Ok(g_value(s, cache.get(s)?, rate_r)))?;
        (s, g.max(0.0))
    };
    let curve = cache
        .samples()
        .into_iter()
        .map(|(s, i_s)| CurveSample {
            s,
            i_s,
            g: g_value(s, i_s, rate_r),
        })
        .collect();
    Ok(ExponentReport {
        rate_r,
        s_star,
        exponent,
        r_half: rh.value,
        mutual_info,
        in_scope,
        curve,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub s: f64,
    pub rate: f64,
    pub exponent: f64,
    pub i_s: f64,
    pub derivative: f64,
}

/// `R(s) = I_s − s(1−s) I'_s` and `exponent(s) = (1−s)² I'_s` on a grid in
/// `(1/2, 1]`, with `I'_s` from the envelope method.
pub fn rate_curve(state: &BipartiteState, s_grid: &[f64], config: &FixedPointConfig) -> Result<Vec<RatePoint>> {
    s_grid
        .par_iter()
        .map(|&s| {
            if !(s > 0.5 && s <= 1.0) {
                return Err(Error::Domain(format!("rate curve needs s ∈ (1/2, 1], got {s}")));
            }
            let sol = prmi_down_down(state, RenyiOrder::new(s)?, config)?;
            let derivative = if (s - 1.0).abs() < ONE_WINDOW {
                0.5 * mutual_information_variance(state)?
            } else {
                debug_assert!(sol.route != SolverRoute::Oracle);
                envelope_derivative(state, &sol.sigma_a, &sol.tau_b, s)?
            };
            Ok(RatePoint {
                s,
                rate: sol.value - s * (1.0 - s) * derivative,
                exponent: (1.0 - s) * (1.0 - s) * derivative,
                i_s: sol.value,
                derivative,
            })
        })
        .collect()
}
