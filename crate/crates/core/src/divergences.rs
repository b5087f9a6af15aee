//! Petz and sandwiched Rényi divergences, relative entropy, information
//! variance and Rényi entropies.
//!
//! Infinite divergences are reported as [`DivergenceValue::Infinite`]; no
//! floating-point infinity enters arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{trace_product, HermitianOperator};
use crate::states::{BipartiteState, DensityOperator};

/// Orders with `|α − 1|` below this are treated as `α = 1`.
pub const ONE_WINDOW: f64 = 1e-6;
/// Overlap tolerance of the support predicates.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Zero,
    Low,
    Mid,
    One,
    High,
    Beyond,
}

/// Validated Rényi order `α ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiOrder {
    alpha: f64,
    regime: Regime,
}

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Domain(format!("Rényi order must be finite and ≥ 0, got {alpha}")));
        }
        let regime = if (alpha - 1.0).abs() < ONE_WINDOW {
            Regime::One
        } else if alpha == 0.0 {
            Regime::Zero
        } else if alpha <= 0.5 {
            Regime::Low
        } else if alpha < 1.0 {
            Regime::Mid
        } else if alpha <= 2.0 {
            Regime::High
        } else {
            Regime::Beyond
        };
        Ok(Self { alpha, regime })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_one(&self) -> bool {
        self.regime == Regime::One
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    /// `q` is `Q_α` (or `Q̃_α`) when the finite-order formula was used.
    Finite { value: f64, q: Option<f64> },
    Infinite,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        DivergenceValue::Finite { value, q: None }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            DivergenceValue::Finite { value, .. } => Some(*value),
            DivergenceValue::Infinite => None,
        }
    }

    pub fn q_value(&self) -> Option<f64> {
        match self {
            DivergenceValue::Finite { q, .. } => *q,
            DivergenceValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, DivergenceValue::Infinite)
    }

    /// For reporting only.
    pub fn to_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn expect_finite(&self, what: &str) -> Result<f64> {
        self.value()
            .ok_or_else(|| Error::Domain(format!("{what} is infinite")))
    }
}

fn check_sigma(rho: &DensityOperator, sigma: &HermitianOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    if !sigma.is_psd() {
        return Err(Error::NegativeEigenvalue {
            eigenvalue: sigma.min_eigenvalue(),
        });
    }
    Ok(())
}

/// `ρ ≪ σ`: `tr[ρ(1 − σ⁰)] ≤ 1e-10`.
pub fn absolutely_continuous(rho: &HermitianOperator, sigma: &HermitianOperator) -> bool {
    let proj = sigma.support_projector();
    rho.trace() - rho.inner(&proj) <= SUPPORT_TOL
}

/// `ρ ⊥ σ`: `tr[ρ⁰σ⁰] ≤ 1e-10`.
pub fn orthogonal(rho: &HermitianOperator, sigma: &HermitianOperator) -> bool {
    rho.support_projector().inner(&sigma.support_projector()) <= SUPPORT_TOL
}

/// `(α < 1 ∧ ρ ⊥̸ σ) ∨ ρ ≪ σ`.
pub fn petz_finite(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> bool {
    if alpha < 1.0 && !orthogonal(rho, sigma) {
        return true;
    }
    absolutely_continuous(rho, sigma)
}

/// Turns `Q` into `(1/(α−1)) ln Q`, treating a nonpositive `Q` as an
/// infinite divergence.
pub fn divergence_from_q(q: f64, alpha: f64) -> DivergenceValue {
    if q > 0.0 && q.is_finite() {
        let value = if alpha == 0.0 { -q.ln() } else { q.ln() / (alpha - 1.0) };
        DivergenceValue::Finite { value, q: Some(q) }
    } else {
        DivergenceValue::Infinite
    }
}

pub fn petz_divergence(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    alpha: RenyiOrder,
) -> Result<DivergenceValue> {
    check_sigma(rho, sigma)?;
    if alpha.is_one() {
        return relative_entropy(rho, sigma);
    }
    let a = alpha.alpha();
    if !petz_finite(rho.op(), sigma, a) {
        return Ok(DivergenceValue::Infinite);
    }
    let q = if a == 0.0 {
        rho.op().support_projector().inner(sigma)
    } else {
        trace_product(
            rho.op().power_on_support(a)?.matrix(),
            sigma.power_on_support(1.0 - a)?.matrix(),
        )
    };
    Ok(divergence_from_q(q, a))
}

pub fn sandwiched_divergence(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<DivergenceValue> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!("sandwiched order must be positive, got {alpha}")));
    }
    check_sigma(rho, sigma)?;
    if (alpha - 1.0).abs() < ONE_WINDOW {
        return relative_entropy(rho, sigma);
    }
    if !petz_finite(rho.op(), sigma, alpha) {
        return Ok(DivergenceValue::Infinite);
    }
    let s = sigma.power_on_support((1.0 - alpha) / (2.0 * alpha))?;
    let inner = s.sandwich(rho.op());
    let cut = inner.default_cutoff();
    let q: f64 = inner
        .eigenvalues()
        .iter()
        .filter(|&&l| l > cut)
        .map(|l| l.powf(alpha))
        .sum();
    Ok(divergence_from_q(q, alpha))
}

/// `Σ λ ln λ` over the spectrum of a PSD operator.
fn neg_entropy(op: &HermitianOperator) -> f64 {
    let cut = op.default_cutoff();
    op.eigenvalues()
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| l * l.ln())
        .sum()
}

pub fn relative_entropy(rho: &DensityOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_sigma(rho, sigma)?;
    if !absolutely_continuous(rho.op(), sigma) {
        return Ok(DivergenceValue::Infinite);
    }
    let cross = rho.op().inner(&sigma.log_on_support()?);
    Ok(DivergenceValue::finite(neg_entropy(rho.op()) - cross))
}

/// `tr[ρ (ln ρ − ln σ − D)²]`.
pub fn info_variance(rho: &DensityOperator, sigma: &HermitianOperator) -> Result<f64> {
    check_sigma(rho, sigma)?;
    let d = relative_entropy(rho, sigma)?.expect_finite("relative entropy")?;
    let n = rho.dim();
    let l = rho
        .op()
        .log_on_support()?
        .sub(&sigma.log_on_support()?)
        .sub(&HermitianOperator::identity(n).scale(d));
    let half = rho.op().power_on_support(0.5)?;
    let m = half.matrix() * l.matrix();
    Ok(m.iter().map(|z| z.norm_sqr()).sum())
}

/// `H_α = (1/(1−α)) ln tr[ρ^α]` for `α ∈ [−∞, ∞]`, with the von Neumann,
/// min- and max-entropy limits.
pub fn renyi_entropy(rho: &DensityOperator, alpha: f64) -> f64 {
    let op = rho.op();
    let cut = op.default_cutoff();
    let ev: Vec<f64> = op.eigenvalues().iter().copied().filter(|&l| l > cut).collect();
    renyi_entropy_of_spectrum(&ev, alpha)
}

/// Rényi entropy of a probability vector; zero entries are ignored.
pub fn renyi_entropy_of_spectrum(p: &[f64], alpha: f64) -> f64 {
    let ev: Vec<f64> = p.iter().copied().filter(|&l| l > 0.0).collect();
    if ev.is_empty() {
        return 0.0;
    }
    if alpha == f64::INFINITY {
        return -ev.iter().copied().fold(0.0, f64::max).ln();
    }
    if alpha == f64::NEG_INFINITY {
        return -ev.iter().copied().fold(f64::INFINITY, f64::min).ln();
    }
    if alpha == 0.0 {
        return (ev.len() as f64).ln();
    }
    let t = alpha - 1.0;
    if t.abs() < ONE_WINDOW {
        // Second-order expansion around the von Neumann entropy.
        let mean: f64 = ev.iter().map(|&l| l * l.ln()).sum();
        let second: f64 = ev.iter().map(|&l| l * l.ln() * l.ln()).sum();
        return -mean - 0.5 * t * (second - mean * mean);
    }
    // Log-sum-exp keeps very large or very negative orders finite.
    let pivot = if alpha > 0.0 {
        ev.iter().copied().fold(0.0, f64::max)
    } else {
        ev.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let s: f64 = ev.iter().map(|&l| (l / pivot).powf(alpha)).sum();
    (alpha * pivot.ln() + s.ln()) / (1.0 - alpha)
}

/// `I(A:B) = D(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn mutual_information(state: &BipartiteState) -> f64 {
    let ha = -neg_entropy(state.rho_a().op());
    let hb = -neg_entropy(state.rho_b().op());
    let hab = -neg_entropy(state.rho_ab().op());
    ha + hb - hab
}

/// `V(A:B) = V(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn mutual_information_variance(state: &BipartiteState) -> Result<f64> {
    info_variance(state.rho_ab(), &state.marginal_product())
}
