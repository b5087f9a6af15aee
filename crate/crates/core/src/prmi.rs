//! Petz Rényi mutual informations.
//!
//! * `I^{↑↑}_α = D_α(ρ_AB ‖ ρ_A ⊗ ρ_B)`
//! * `I^{↑↓}_α = inf_τ D_α(ρ_AB ‖ ρ_A ⊗ τ_B)`
//! * `I^{↓↓}_α = inf_{σ,τ} D_α(ρ_AB ‖ σ_A ⊗ τ_B)`
//!
//! The inner minimization over one side has a closed form; the doubly
//! minimized quantity is found by alternating the two closed-form updates.

use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::{
    absolutely_continuous, orthogonal, petz_divergence, renyi_entropy_of_spectrum, DivergenceValue,
    RenyiOrder, ONE_WINDOW,
};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::oracle;
use crate::states::{
    classify, copy_cc_pmf, random_density_seeded, BipartiteState, DensityOperator, StateKind,
};

/// Monotonicity slack per half-step before the solver reports degradation.
pub const MONOTONE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AToB,
    BToA,
}

#[derive(Debug, Clone)]
pub enum Init {
    Marginal,
    MaximallyMixedOnSupport,
    Explicit(DensityOperator),
}

#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Trace-norm distance between successive `σ_A` at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
    /// `None` picks 1 for `α ∈ (1/2, 1]` and 8 otherwise.
    pub restarts: Option<usize>,
    /// Seed of the random restarts.
    pub seed: u64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
            init: Init::Marginal,
            restarts: None,
            seed: 0,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if self.restarts == Some(0) {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn restarts_for(&self, alpha: f64) -> usize {
        self.restarts
            .unwrap_or(if alpha > 0.5 && alpha <= 1.0 { 1 } else { 8 })
    }
}

/// How a doubly minimized value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverRoute {
    Iterative,
    RelativeEntropy,
    Product,
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone)]
pub struct PrmiSolution {
    pub value: f64,
    pub sigma_a: DensityOperator,
    pub tau_b: DensityOperator,
    /// `‖𝒩_{A→A}(σ_A) − σ_A‖₁`; NaN on non-iterative routes.
    pub residual: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub certified: bool,
    pub converged: bool,
    pub route: SolverRoute,
    pub warnings: Vec<String>,
}

/// Closed-form classes of the doubly minimized PRMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormKind {
    Pure,
    CopyCc,
    AcIndependent,
}

/// Closed form of `I^{↓↓}_α` from the spectrum of `ρ_A`.
pub fn prmi_closed_form(kind: ClosedFormKind, marginal_spectrum: &[f64], alpha: f64) -> f64 {
    let h = |g: f64| renyi_entropy_of_spectrum(marginal_spectrum, g);
    let copy = kind == ClosedFormKind::CopyCc;
    if alpha <= 0.5 {
        let h_inf = h(f64::INFINITY);
        if copy {
            alpha / (1.0 - alpha) * h_inf
        } else {
            h_inf / (1.0 - alpha)
        }
    } else if copy {
        h(alpha / (2.0 * alpha - 1.0))
    } else {
        2.0 * h(1.0 / (2.0 * alpha - 1.0))
    }
}

pub fn closed_form_kind(kind: StateKind) -> Option<ClosedFormKind> {
    match kind {
        StateKind::Pure => Some(ClosedFormKind::Pure),
        StateKind::CopyCc => Some(ClosedFormKind::CopyCc),
        StateKind::AcIndependent => Some(ClosedFormKind::AcIndependent),
        _ => None,
    }
}

/// Result of one exact partial minimization.
#[derive(Debug, Clone)]
pub struct HalfStep {
    pub value: DivergenceValue,
    pub minimizer: Option<DensityOperator>,
}

/// `ρ^α` in both subsystem orders, reused across half-steps.
pub struct Engine<'a> {
    state: &'a BipartiteState,
    alpha: f64,
    rho_pow_ab: HermitianOperator,
    rho_pow_ba: HermitianOperator,
    neg_entropy_ab: f64,
}

impl<'a> Engine<'a> {
    pub fn new(state: &'a BipartiteState, alpha: f64) -> Result<Self> {
        RenyiOrder::new(alpha)?;
        let rho = state.rho_ab().op();
        let rho_pow_ab = rho.power_on_support(alpha)?;
        let rho_pow_ba = rho_pow_ab.permute(&state.dims(), &[1, 0])?;
        let neg_entropy_ab = -renyi_entropy_of_spectrum(rho.eigenvalues(), 1.0);
        Ok(Self {
            state,
            alpha,
            rho_pow_ab,
            rho_pow_ba,
            neg_entropy_ab,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn state(&self) -> &BipartiteState {
        self.state
    }

    /// `tr_1[(x^{(1−α)/2} ⊗ 1) ρ^α (x^{(1−α)/2} ⊗ 1)]` for `x` on the first
    /// subsystem of `direction`.
    fn partial_operator(&self, direction: Direction, x: &HermitianOperator) -> Result<HermitianOperator> {
        let (rho_pow, d1, d2) = match direction {
            Direction::AToB => (&self.rho_pow_ab, self.state.d_a(), self.state.d_b()),
            Direction::BToA => (&self.rho_pow_ba, self.state.d_b(), self.state.d_a()),
        };
        if x.dim() != d1 {
            return Err(Error::DimensionMismatch {
                expected: d1,
                actual: x.dim(),
            });
        }
        let s = x.power_on_support((1.0 - self.alpha) / 2.0)?;
        let lifted = s.tensor(&HermitianOperator::identity(d2));
        lifted.sandwich(rho_pow).partial_trace(&[d1, d2], &[1])
    }

    fn marginals(&self, direction: Direction) -> (&DensityOperator, &DensityOperator) {
        match direction {
            Direction::AToB => (self.state.rho_a(), self.state.rho_b()),
            Direction::BToA => (self.state.rho_b(), self.state.rho_a()),
        }
    }

    /// Minimizes `D_α(ρ ‖ x ⊗ y)` over the state `y` of the other subsystem.
    pub fn half_step(&self, direction: Direction, x: &HermitianOperator) -> Result<HalfStep> {
        let a = self.alpha;
        let (m1, m2) = self.marginals(direction);
        let finite = if a < 1.0 && (a - 1.0).abs() >= ONE_WINDOW {
            !orthogonal(m1.op(), x)
        } else {
            absolutely_continuous(m1.op(), x)
        };
        if !finite {
            return Ok(HalfStep {
                value: DivergenceValue::Infinite,
                minimizer: None,
            });
        }
        let m = self.partial_operator(direction, x)?;
        if a == 0.0 {
            let sp = m.spectrum();
            let top = sp.eigenvalues[0];
            if !(top > 0.0) {
                return Ok(HalfStep {
                    value: DivergenceValue::Infinite,
                    minimizer: None,
                });
            }
            let v: Vec<_> = sp.eigenvectors.column(0).iter().copied().collect();
            let tau = DensityOperator::normalized_unchecked(HermitianOperator::projector_onto(&v));
            return Ok(HalfStep {
                value: DivergenceValue::Finite {
                    value: -top.ln(),
                    q: Some(top),
                },
                minimizer: Some(tau),
            });
        }
        let mp = m.power_on_support(1.0 / a)?;
        let t = mp.trace();
        if !(t > 0.0) || !t.is_finite() {
            return Ok(HalfStep {
                value: DivergenceValue::Infinite,
                minimizer: None,
            });
        }
        let y = DensityOperator::normalized_unchecked(mp);
        let value = if (a - 1.0).abs() < ONE_WINDOW {
            if !absolutely_continuous(m2.op(), y.op()) {
                DivergenceValue::Infinite
            } else {
                let c1 = m1.op().inner(&x.log_on_support()?);
                let c2 = m2.op().inner(&y.op().log_on_support()?);
                DivergenceValue::finite(self.neg_entropy_ab - c1 - c2)
            }
        } else {
            DivergenceValue::Finite {
                value: a / (a - 1.0) * t.ln(),
                q: Some(t.powf(a)),
            }
        };
        Ok(HalfStep {
            value,
            minimizer: Some(y),
        })
    }

    /// `𝒩` map of the given direction.
    pub fn map(&self, direction: Direction, x: &HermitianOperator) -> Result<DensityOperator> {
        if self.alpha == 0.0 {
            return Err(Error::Domain("fixed-point maps need α > 0".into()));
        }
        let step = self.half_step(direction, x)?;
        step.minimizer
            .ok_or_else(|| Error::Domain("input is orthogonal to the matching marginal".into()))
    }

    /// `𝒩_{A→A} = 𝒩_{B→A} ∘ 𝒩_{A→B}`.
    pub fn map_a_to_a(&self, sigma: &HermitianOperator) -> Result<DensityOperator> {
        let tau = self.map(Direction::AToB, sigma)?;
        self.map(Direction::BToA, tau.op())
    }
}

/// Which of the three mutual informations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    UpUp,
    UpDown,
    DownDown,
}

/// Value of the selected mutual information; `None` when infinite.
pub fn prmi_value(
    state: &BipartiteState,
    which: Which,
    alpha: RenyiOrder,
    config: &FixedPointConfig,
) -> Result<Option<f64>> {
    Ok(match which {
        Which::UpUp => prmi_up_up(state, alpha)?.value(),
        Which::UpDown => prmi_up_down(state, alpha)?.0.value(),
        Which::DownDown => Some(prmi_down_down(state, alpha, config)?.value),
    })
}

/// `D_α(ρ_AB ‖ σ_A ⊗ τ_B)`.
pub fn pair_objective(
    state: &BipartiteState,
    sigma_a: &HermitianOperator,
    tau_b: &HermitianOperator,
    alpha: RenyiOrder,
) -> Result<DivergenceValue> {
    petz_divergence(state.rho_ab(), &sigma_a.tensor(tau_b), alpha)
}

/// `I^↑_α(ρ_AB ‖ σ_A) = D_α(ρ_AB ‖ σ_A ⊗ ρ_B)`.
pub fn gen_prmi_up(state: &BipartiteState, sigma_a: &DensityOperator, alpha: RenyiOrder) -> Result<DivergenceValue> {
    pair_objective(state, sigma_a.op(), state.rho_b().op(), alpha)
}

/// `I^↓_α(ρ_AB ‖ σ_A) = inf_τ D_α(ρ_AB ‖ σ_A ⊗ τ_B)` with its minimizer.
pub fn gen_prmi_down(
    state: &BipartiteState,
    sigma_a: &DensityOperator,
    alpha: RenyiOrder,
) -> Result<(DivergenceValue, Option<DensityOperator>)> {
    let engine = Engine::new(state, alpha.alpha())?;
    let step = engine.half_step(Direction::AToB, sigma_a.op())?;
    Ok((step.value, step.minimizer))
}

pub fn prmi_up_up(state: &BipartiteState, alpha: RenyiOrder) -> Result<DivergenceValue> {
    petz_divergence(state.rho_ab(), &state.marginal_product(), alpha)
}

pub fn prmi_up_down(
    state: &BipartiteState,
    alpha: RenyiOrder,
) -> Result<(DivergenceValue, Option<DensityOperator>)> {
    gen_prmi_down(state, state.rho_a(), alpha)
}

pub fn fixed_point_map(
    state: &BipartiteState,
    x: &DensityOperator,
    alpha: RenyiOrder,
    direction: Direction,
) -> Result<DensityOperator> {
    Engine::new(state, alpha.alpha())?.map(direction, x.op())
}

struct RunResult {
    sigma: DensityOperator,
    tau: DensityOperator,
    value: f64,
    iterations: usize,
    trace: Vec<f64>,
    converged: bool,
}

fn finite_step(step: HalfStep) -> Result<(f64, DensityOperator)> {
    match (step.value, step.minimizer) {
        (DivergenceValue::Finite { value, .. }, Some(m)) => Ok((value, m)),
        _ => Err(Error::NumericalDegradation(
            "alternating step left the support of the marginal".into(),
        )),
    }
}

/// Alternating minimization from `init` until successive `σ_A` agree within
/// `tol` in trace norm.
fn alternate(engine: &Engine, init: DensityOperator, tol: f64, max_iter: usize) -> Result<RunResult> {
    let a = engine.alpha();
    // Rounding in ln t is amplified by α/(α−1) near α = 1.
    let slack = MONOTONE_TOL + 64.0 * f64::EPSILON / (a - 1.0).abs().max(f64::EPSILON);
    let mut sigma = init;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let check = |trace: &mut Vec<f64>, v: f64| -> Result<()> {
        if let Some(&prev) = trace.last() {
            if v > prev + slack {
                return Err(Error::NumericalDegradation(format!(
                    "objective increased from {prev} to {v}"
                )));
            }
        }
        trace.push(v);
        Ok(())
    };
    for it in 1..=max_iter {
        iterations = it;
        let (v1, tau) = finite_step(engine.half_step(Direction::AToB, sigma.op())?)?;
        check(&mut trace, v1)?;
        let (v2, next) = finite_step(engine.half_step(Direction::BToA, tau.op())?)?;
        check(&mut trace, v2)?;
        let diff = next.trace_distance(&sigma);
        sigma = next;
        if diff <= tol {
            converged = true;
            break;
        }
    }
    let (value, tau) = finite_step(engine.half_step(Direction::AToB, sigma.op())?)?;
    check(&mut trace, value)?;
    Ok(RunResult {
        sigma,
        tau,
        value,
        iterations,
        trace,
        converged,
    })
}

fn initial_states(state: &BipartiteState, config: &FixedPointConfig, restarts: usize) -> Result<Vec<DensityOperator>> {
    let d_a = state.d_a();
    let first = match &config.init {
        Init::Marginal => state.rho_a().clone(),
        Init::MaximallyMixedOnSupport => {
            DensityOperator::normalized_unchecked(state.rho_a().op().support_projector())
        }
        Init::Explicit(s) => {
            if s.dim() != d_a {
                return Err(Error::DimensionMismatch {
                    expected: d_a,
                    actual: s.dim(),
                });
            }
            s.clone()
        }
    };
    let mut out = vec![first];
    for k in 1..restarts {
        let seed = config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64);
        out.push(random_density_seeded(d_a, d_a, seed)?);
    }
    Ok(out)
}

/// Iterative solver without regime routing.
pub fn solve_iterative(
    state: &BipartiteState,
    alpha: RenyiOrder,
    config: &FixedPointConfig,
) -> Result<PrmiSolution> {
    config.validate()?;
    let a = alpha.alpha();
    if a <= 0.0 {
        return Err(Error::Domain("the iterative solver needs α > 0".into()));
    }
    let engine = Engine::new(state, a)?;
    let restarts = config.restarts_for(a);
    let inits = initial_states(state, config, restarts)?;
    let runs: Vec<Result<RunResult>> = inits
        .into_par_iter()
        .map(|init| alternate(&engine, init, config.tol, config.max_iter))
        .collect();
    let runs: Vec<RunResult> = runs.into_iter().collect::<Result<_>>()?;
    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.value < runs[best].value {
            best = k;
        }
    }
    let mut warnings = Vec::new();
    let agree = runs.iter().all(|r| r.sigma.trace_distance(&runs[best].sigma) <= 1e-8);
    if !agree {
        warnings.push("restarts converged to different minimizers".to_string());
    }
    let b = &runs[best];
    let residual = engine.map_a_to_a(b.sigma.op())?.trace_distance(&b.sigma);
    let converged = runs.iter().all(|r| r.converged);
    if !converged {
        warnings.push(format!("not converged within {} iterations", config.max_iter));
    }
    if a > 2.0 {
        warnings.push("α > 2: no fixed-point characterization of minimizers".to_string());
    }
    let in_range = a > 0.5 && a <= 2.0;
    let certified = in_range && residual <= 10.0 * config.tol && (a <= 1.0 || agree);
    let b = runs.into_iter().nth(best).expect("best index is in range");
    Ok(PrmiSolution {
        value: b.value,
        sigma_a: b.sigma,
        tau_b: b.tau,
        residual,
        iterations: b.iterations,
        objective_trace: b.trace,
        certified,
        converged,
        route: SolverRoute::Iterative,
        warnings,
    })
}

fn top_eigenprojector(op: &HermitianOperator) -> DensityOperator {
    let v: Vec<_> = op.spectrum().eigenvectors.column(0).iter().copied().collect();
    DensityOperator::normalized_unchecked(HermitianOperator::projector_onto(&v))
}

fn exact_solution(
    value: f64,
    sigma_a: DensityOperator,
    tau_b: DensityOperator,
    route: SolverRoute,
) -> PrmiSolution {
    PrmiSolution {
        value,
        sigma_a,
        tau_b,
        residual: f64::NAN,
        iterations: 0,
        objective_trace: vec![value],
        certified: false,
        converged: true,
        route,
        warnings: Vec::new(),
    }
}

/// `I^{↓↓}_α` with regime routing:
///
/// * `α = 1`: the minimizer is `(ρ_A, ρ_B)` and the value is `I(A:B)`.
/// * `α > 1/2`: alternating fixed-point iteration.
/// * `α ≤ 1/2`: product states give 0, pure / copy-CC / AC-independent
///   states use the closed form, other states with `d_A, d_B ≤ 3` use the
///   brute-force oracle polished by alternating steps.
pub fn prmi_down_down(
    state: &BipartiteState,
    alpha: RenyiOrder,
    config: &FixedPointConfig,
) -> Result<PrmiSolution> {
    config.validate()?;
    let a = alpha.alpha();
    if alpha.is_one() {
        let engine = Engine::new(state, 1.0)?;
        let sigma = state.rho_a().clone();
        let step = finite_step(engine.half_step(Direction::AToB, sigma.op())?)?;
        let residual = engine.map_a_to_a(sigma.op())?.trace_distance(&sigma);
        let mut sol = exact_solution(step.0, sigma, state.rho_b().clone(), SolverRoute::RelativeEntropy);
        sol.residual = residual;
        sol.certified = residual <= 10.0 * config.tol;
        return Ok(sol);
    }
    if a > 0.5 {
        return solve_iterative(state, alpha, config);
    }
    let kind = classify(state);
    if kind == StateKind::Product {
        return Ok(exact_solution(
            0.0,
            state.rho_a().clone(),
            state.rho_b().clone(),
            SolverRoute::Product,
        ));
    }
    if let Some(cf) = closed_form_kind(kind) {
        let spectrum: Vec<f64> = match kind {
            StateKind::CopyCc => copy_cc_pmf(state).expect("classified as copy-CC"),
            _ => state.rho_a().op().eigenvalues().to_vec(),
        };
        let value = prmi_closed_form(cf, &spectrum, a);
        let sigma = top_eigenprojector(state.rho_a().op());
        let engine = Engine::new(state, a)?;
        let (_, tau) = finite_step(engine.half_step(Direction::AToB, sigma.op())?)?;
        return Ok(exact_solution(value, sigma, tau, SolverRoute::ClosedForm));
    }
    if state.d_a() <= 3 && state.d_b() <= 3 {
        return oracle_route(state, a, config);
    }
    Err(Error::UnsupportedRegime(format!(
        "α = {a} ≤ 1/2 needs a closed-form state class or local dimensions ≤ 3"
    )))
}

fn oracle_route(state: &BipartiteState, a: f64, config: &FixedPointConfig) -> Result<PrmiSolution> {
    let found = oracle::brute_force_dd(state, a, oracle::DEFAULT_RESOLUTION)?;
    let engine = Engine::new(state, a)?;
    let mut sigma = found.sigma_a;
    let mut value = found.value;
    let mut tau = found.tau_b;
    let mut trace = vec![value];
    let mut iterations = 0;
    // Exact partial minimizations can only lower the objective.
    for it in 1..=config.max_iter.min(2000) {
        iterations = it;
        let Ok((_, t)) = finite_step(engine.half_step(Direction::AToB, sigma.op())?) else {
            break;
        };
        let Ok((v, s)) = finite_step(engine.half_step(Direction::BToA, t.op())?) else {
            break;
        };
        let Ok((v2, t2)) = finite_step(engine.half_step(Direction::AToB, s.op())?) else {
            break;
        };
        let v = v.min(v2);
        if v > value - 1e-15 {
            break;
        }
        let diff = s.trace_distance(&sigma);
        value = v;
        sigma = s;
        tau = t2;
        trace.push(value);
        if diff <= config.tol {
            break;
        }
    }
    Ok(PrmiSolution {
        value,
        sigma_a: sigma,
        tau_b: tau,
        residual: f64::NAN,
        iterations,
        objective_trace: trace,
        certified: false,
        converged: true,
        route: SolverRoute::Oracle,
        warnings: vec!["α ≤ 1/2: value from the brute-force oracle, an upper bound".to_string()],
    })
}
