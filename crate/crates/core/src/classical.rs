//! Classical Rényi divergence and Rényi mutual informations of joint PMFs,
//! in plain scalar arithmetic.

use rand::Rng;
use rand_distr::Exp1;

use crate::divergences::{divergence_from_q, DivergenceValue, ONE_WINDOW};
use crate::error::{Error, Result};
use crate::prmi::FixedPointConfig;
use crate::states::{seeded_rng, Pmf};

fn kl(p: &[f64], q: &[f64]) -> DivergenceValue {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return DivergenceValue::Infinite;
            }
            acc += a * (a / b).ln();
        }
    }
    DivergenceValue::finite(acc)
}

/// `(1/(α−1)) ln Σ p^α q^{1−α}` with the quantum support rules.
pub fn classical_divergence(p: &[f64], q: &[f64], alpha: f64) -> Result<DivergenceValue> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!("Rényi order must be finite and ≥ 0, got {alpha}")));
    }
    if q.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("second argument must be nonnegative".into()));
    }
    if (alpha - 1.0).abs() < ONE_WINDOW {
        return Ok(kl(p, q));
    }
    let dominated = p.iter().zip(q).all(|(&a, &b)| a <= 0.0 || b > 0.0);
    if alpha > 1.0 && !dominated {
        return Ok(DivergenceValue::Infinite);
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| if alpha == 0.0 { b } else { a.powf(alpha) * b.powf(1.0 - alpha) })
        .sum();
    Ok(divergence_from_q(s, alpha))
}

/// Joint table as rows `P(x, ·)`.
fn table(joint: &Pmf) -> Result<Vec<Vec<f64>>> {
    if !joint.is_joint() {
        return Err(Error::InvalidInput("expected a joint (2-D) PMF".into()));
    }
    let (rows, cols) = joint.shape();
    Ok((0..rows).map(|x| (0..cols).map(|y| joint.get(x, y)).collect()).collect())
}

fn transpose(t: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = t.first().map_or(0, |r| r.len());
    (0..cols).map(|y| t.iter().map(|row| row[y]).collect()).collect()
}

/// Exact minimization over the second marginal: returns
/// `(1/(α−1)) ln ‖m‖_{1/α}` with `m_y = Σ_x P(x,y)^α q_x^{1−α}` and the
/// minimizer `∝ m^{1/α}`. `p_first` is the first marginal of `P`.
fn half_step(t: &[Vec<f64>], p_first: &[f64], q: &[f64], alpha: f64) -> Option<(f64, Vec<f64>)> {
    let cols = t[0].len();
    if (alpha - 1.0).abs() < ONE_WINDOW {
        if p_first.iter().zip(q).any(|(&a, &b)| a > 0.0 && b <= 0.0) {
            return None;
        }
        let r: Vec<f64> = (0..cols).map(|y| t.iter().map(|row| row[y]).sum()).collect();
        let mut v = 0.0;
        for (x, row) in t.iter().enumerate() {
            for (y, &pxy) in row.iter().enumerate() {
                if pxy > 0.0 {
                    v += pxy * (pxy / (q[x] * r[y])).ln();
                }
            }
        }
        return Some((v, r));
    }
    if alpha > 1.0 && p_first.iter().zip(q).any(|(&a, &b)| a > 0.0 && b <= 0.0) {
        return None;
    }
    let m: Vec<f64> = (0..cols)
        .map(|y| {
            t.iter()
                .zip(q)
                .filter(|(row, &qx)| row[y] > 0.0 && qx > 0.0)
                .map(|(row, &qx)| if alpha == 0.0 { qx } else { row[y].powf(alpha) * qx.powf(1.0 - alpha) })
                .sum()
        })
        .collect();
    if alpha == 0.0 {
        let (ybest, &top) = m
            .iter()
            .enumerate()
            .fold((0, &m[0]), |b, (i, v)| if *v > *b.1 { (i, v) } else { b });
        if !(top > 0.0) {
            return None;
        }
        let mut r = vec![0.0; cols];
        r[ybest] = 1.0;
        return Some((-top.ln(), r));
    }
    let mp: Vec<f64> = m.iter().map(|&v| if v > 0.0 { v.powf(1.0 / alpha) } else { 0.0 }).collect();
    let s: f64 = mp.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    Some((alpha / (alpha - 1.0) * s.ln(), mp.iter().map(|v| v / s).collect()))
}

/// `I^{↑↓}_α(X:Y) = inf_R D_α(P_XY ‖ P_X R_Y)` with its minimizer.
pub fn classical_rmi_up_down(joint: &Pmf, alpha: f64) -> Result<(f64, Pmf)> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!("Rényi order must be finite and ≥ 0, got {alpha}")));
    }
    let t = table(joint)?;
    let px = joint.marginal_x();
    let (v, r) = half_step(&t, &px, &px, alpha).expect("P_X dominates itself");
    Ok((v, Pmf::vector(renormalize(r))?))
}

fn renormalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    v
}

#[derive(Debug, Clone)]
pub struct ClassicalSolution {
    pub value: f64,
    pub q_x: Vec<f64>,
    pub r_y: Vec<f64>,
    /// `‖N_{X→X}(q) − q‖₁`; NaN on non-iterative routes.
    pub residual: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub certified: bool,
    pub converged: bool,
}

struct Run {
    q: Vec<f64>,
    r: Vec<f64>,
    value: f64,
    iterations: usize,
    trace: Vec<f64>,
    converged: bool,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn alternate(
    t: &[Vec<f64>],
    tt: &[Vec<f64>],
    px: &[f64],
    py: &[f64],
    init: Vec<f64>,
    alpha: f64,
    config: &FixedPointConfig,
) -> Result<Run> {
    let (tol, max_iter) = (config.tol, config.max_iter);
    let slack = 1e-11 + 64.0 * f64::EPSILON / (alpha - 1.0).abs().max(f64::EPSILON);
    let fail = || Error::NumericalDegradation("alternating step left the support of the marginal".into());
    let mut q = init;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let push = |trace: &mut Vec<f64>, v: f64| -> Result<()> {
        if let Some(&prev) = trace.last() {
            if v > prev + slack {
                return Err(Error::NumericalDegradation(format!("objective increased from {prev} to {v}")));
            }
        }
        trace.push(v);
        Ok(())
    };
    for it in 1..=max_iter {
        iterations = it;
        let (v1, r) = half_step(t, px, &q, alpha).ok_or_else(fail)?;
        push(&mut trace, v1)?;
        let (v2, next) = half_step(tt, py, &r, alpha).ok_or_else(fail)?;
        push(&mut trace, v2)?;
        let diff = l1(&next, &q);
        q = next;
        if diff <= tol {
            converged = true;
            break;
        }
    }
    let (value, r) = half_step(t, px, &q, alpha).ok_or_else(fail)?;
    push(&mut trace, value)?;
    Ok(Run {
        q,
        r,
        value,
        iterations,
        trace,
        converged,
    })
}

fn random_simplex(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    renormalize(v)
}

/// Compositions of `total` into `k` nonnegative parts, scaled to the simplex.
fn simplex_grid(k: usize, total: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i);
            rec(k - 1, left - i, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(k, total, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|c| c.into_iter().map(|i| i as f64 / total as f64).collect())
        .collect()
}

/// `I^{↓↓}_α(X:Y) = inf_{Q,R} D_α(P_XY ‖ Q_X R_Y)`.
///
/// `α > 1/2` alternates the two closed-form updates. `α ≤ 1/2` searches a
/// simplex grid over the first marginal (vertices included), takes the exact
/// second-marginal step and polishes with alternating updates.
pub fn classical_rmi_down_down(joint: &Pmf, alpha: f64, config: &FixedPointConfig) -> Result<ClassicalSolution> {
    config.validate()?;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!("Rényi order must be finite and ≥ 0, got {alpha}")));
    }
    let t = table(joint)?;
    let tt = transpose(&t);
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    if (alpha - 1.0).abs() < ONE_WINDOW {
        let (value, r) = half_step(&t, &px, &px, 1.0).expect("P_X dominates itself");
        return Ok(ClassicalSolution {
            value,
            q_x: px,
            r_y: r,
            residual: 0.0,
            iterations: 0,
            objective_trace: vec![value],
            certified: true,
            converged: true,
        });
    }
    if alpha > 0.5 {
        let restarts = config.restarts_for(alpha);
        let mut runs = Vec::with_capacity(restarts);
        for k in 0..restarts {
            let init = if k == 0 {
                px.clone()
            } else {
                random_simplex(px.len(), config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64))
            };
            runs.push(alternate(&t, &tt, &px, &py, init, alpha, config)?);
        }
        let best = (0..runs.len())
            .min_by(|&a, &b| runs[a].value.total_cmp(&runs[b].value).then(a.cmp(&b)))
            .expect("at least one run");
        let agree = runs.iter().all(|r| l1(&r.q, &runs[best].q) <= 1e-8);
        let converged = runs.iter().all(|r| r.converged);
        let b = runs.swap_remove(best);
        let (_, r1) = half_step(&t, &px, &b.q, alpha).expect("finite at the solution");
        let (_, q1) = half_step(&tt, &py, &r1, alpha).expect("finite at the solution");
        let residual = l1(&q1, &b.q);
        let certified = alpha <= 2.0 && residual <= 10.0 * config.tol && (alpha <= 1.0 || agree);
        return Ok(ClassicalSolution {
            value: b.value,
            q_x: b.q,
            r_y: b.r,
            residual,
            iterations: b.iterations,
            objective_trace: b.trace,
            certified,
            converged,
        });
    }
    // Grid the smaller alphabet.
    if px.len() > py.len() {
        let sol = classical_rmi_down_down(&joint.transpose(), alpha, config)?;
        return Ok(ClassicalSolution {
            q_x: sol.r_y,
            r_y: sol.q_x,
            ..sol
        });
    }
    let k = px.len();
    let mut total = 1;
    while total < 200 && binom(total + 1 + k - 1, k - 1) <= 200_000 {
        total += 1;
    }
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for q in simplex_grid(k, total) {
        if let Some((v, r)) = half_step(&t, &px, &q, alpha) {
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, q, r));
            }
        }
    }
    let (mut value, mut q, mut r) =
        best.ok_or_else(|| Error::Domain("every grid point gives an infinite objective".into()))?;
    let mut trace = vec![value];
    let mut iterations = 0;
    for it in 1..=config.max_iter.min(2000) {
        iterations = it;
        let Some((_, rr)) = half_step(&t, &px, &q, alpha) else { break };
        let Some((_, qq)) = half_step(&tt, &py, &rr, alpha) else { break };
        let Some((v, r2)) = half_step(&t, &px, &qq, alpha) else { break };
        if v > value - 1e-15 {
            break;
        }
        let diff = l1(&qq, &q);
        value = v;
        q = qq;
        r = r2;
        trace.push(v);
        if diff <= config.tol {
            break;
        }
    }
    Ok(ClassicalSolution {
        value,
        q_x: q,
        r_y: r,
        residual: f64::NAN,
        iterations,
        objective_trace: trace,
        certified: false,
        converged: true,
    })
}

fn binom(n: usize, k: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}
