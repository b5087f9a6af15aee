//! Brute-force minimization of `D_α(ρ_AB ‖ σ_A ⊗ τ_B)` for small local
//! dimensions.
//!
//! Only `σ_A` is searched; for each candidate the optimal `τ_B` is the
//! closed-form partial minimizer. The result is an upper bound on the
//! doubly minimized mutual information.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator};
use crate::prmi::{Direction, Engine};
use crate::states::{random_density, seeded_rng, BipartiteState, DensityOperator};

pub const DEFAULT_RESOLUTION: usize = 24;
/// Seed of the qutrit sample.
pub const QUTRIT_SEED: u64 = 0x5eed;
/// Shrink factor of the local coordinate search.
const SHRINK: f64 = 4.0;
/// Number of shrink rounds of the local search.
const REFINE_ROUNDS: usize = 8;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    pub sigma_a: DensityOperator,
    pub tau_b: DensityOperator,
    pub evaluations: usize,
}

fn qubit(x: f64, y: f64, z: f64) -> DensityOperator {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ],
    );
    DensityOperator::normalized_unchecked(HermitianOperator::from_matrix_unchecked(m))
}

/// Candidate states of dimension `d`.
///
/// `d = 2`: Bloch-ball grid with `resolution` values of each of `r ∈ [0,1]`,
/// `θ ∈ [0,π]` and `φ ∈ [0,2π)`, with the degenerate points at `r = 0` and
/// at the poles emitted once. `d = 3`: `resolution³` seeded random states of
/// ranks 1, 2, 3 in rotation.
pub fn product_state_grid(d: usize, resolution: usize) -> Result<Vec<DensityOperator>> {
    if resolution == 0 {
        return Err(Error::InvalidInput("resolution must be at least 1".into()));
    }
    match d {
        1 => Ok(vec![DensityOperator::maximally_mixed(1)]),
        2 => {
            let k = resolution;
            let mut out = vec![DensityOperator::maximally_mixed(2)];
            if k == 1 {
                return Ok(out);
            }
            for ir in 1..k {
                let r = ir as f64 / (k - 1) as f64;
                out.push(qubit(0.0, 0.0, r));
                out.push(qubit(0.0, 0.0, -r));
                for it in 1..k - 1 {
                    let theta = PI * it as f64 / (k - 1) as f64;
                    for ip in 0..k {
                        let phi = 2.0 * PI * ip as f64 / k as f64;
                        out.push(qubit(
                            r * theta.sin() * phi.cos(),
                            r * theta.sin() * phi.sin(),
                            r * theta.cos(),
                        ));
                    }
                }
            }
            Ok(out)
        }
        3 => {
            let n = resolution.pow(3);
            let mut rng = seeded_rng(QUTRIT_SEED);
            let mut out = Vec::with_capacity(n + 1);
            out.push(DensityOperator::maximally_mixed(3));
            for i in 0..n {
                out.push(random_density(3, 1 + i % 3, &mut rng)?);
            }
            Ok(out)
        }
        _ => Err(Error::UnsupportedRegime(format!("oracle grids exist for d ≤ 3, got {d}"))),
    }
}

fn evaluate(engine: &Engine, sigma: &HermitianOperator) -> Option<(f64, DensityOperator)> {
    let step = engine.half_step(Direction::AToB, sigma).ok()?;
    match (step.value.value(), step.minimizer) {
        (Some(v), Some(t)) if v.is_finite() => Some((v, t)),
        _ => None,
    }
}

/// State from an unconstrained square factor: `G G† / tr(G G†)`.
fn from_factor(g: &CMatrix) -> Option<DensityOperator> {
    let m = g * g.adjoint();
    let t: f64 = m.diagonal().iter().map(|z| z.re).sum();
    if !(t > 0.0) {
        return None;
    }
    Some(DensityOperator::normalized_unchecked(HermitianOperator::from_matrix_unchecked(m)))
}

pub fn brute_force_dd(state: &BipartiteState, alpha: f64, resolution: usize) -> Result<OracleResult> {
    if state.d_a() > 3 || state.d_b() > 3 {
        return Err(Error::UnsupportedRegime(format!(
            "oracle needs d_A, d_B ≤ 3, got {}⊗{}",
            state.d_a(),
            state.d_b()
        )));
    }
    let engine = Engine::new(state, alpha)?;
    let grid = product_state_grid(state.d_a(), resolution)?;
    let scored: Vec<Option<f64>> = grid
        .par_iter()
        .map(|s| evaluate(&engine, s.op()).map(|(v, _)| v))
        .collect();
    let mut evaluations = grid.len();
    let best = scored
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::Domain("every grid point gives an infinite objective".into()))?;

    // Local coordinate search on the real and imaginary parts of a square
    // factor of σ.
    let d = state.d_a();
    let mut g = grid[best.0].op().power_on_support(0.5)?.matrix().clone();
    let (mut value, mut tau) = evaluate(&engine, grid[best.0].op()).expect("finite at the best point");
    let mut step = 1.0 / resolution as f64;
    for _ in 0..REFINE_ROUNDS {
        let mut improved = true;
        while improved {
            improved = false;
            for idx in 0..2 * d * d {
                for sign in [1.0, -1.0] {
                    let mut trial = g.clone();
                    let (i, j) = ((idx / 2) / d, (idx / 2) % d);
                    let delta = if idx % 2 == 0 {
                        Complex64::new(sign * step, 0.0)
                    } else {
                        Complex64::new(0.0, sign * step)
                    };
                    trial[(i, j)] += delta;
                    let Some(cand) = from_factor(&trial) else { continue };
                    evaluations += 1;
                    if let Some((v, t)) = evaluate(&engine, cand.op()) {
                        if v < value - 1e-15 {
                            value = v;
                            tau = t;
                            g = trial;
                            improved = true;
                        }
                    }
                }
            }
        }
        step /= SHRINK;
    }
    let sigma_a = from_factor(&g).expect("factor stays nonzero");
    Ok(OracleResult {
        value,
        sigma_a,
        tau_b: tau,
        evaluations,
    })
}
