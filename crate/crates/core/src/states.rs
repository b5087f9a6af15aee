//! Density operators, bipartite states, classical PMF embeddings and
//! purifications.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator};

/// Accepted deviation of the input trace from one.
pub const TRACE_TOL: f64 = 1e-8;
/// Accepted deviation of a PMF sum from one.
pub const PMF_TOL: f64 = 1e-12;

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    /// Validates PSD and unit trace (within `TRACE_TOL`), then rescales the
    /// trace to one exactly.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if !op.is_psd() {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: op.min_eigenvalue(),
            });
        }
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceMismatch { trace });
        }
        Ok(Self::normalized_unchecked(op))
    }

    /// Divides by the trace without validation.
    pub fn normalized_unchecked(op: HermitianOperator) -> Self {
        let t = op.trace();
        let op = if t == 1.0 { op } else { op.scale(1.0 / t) };
        Self { op }
    }

    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(mat)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::normalized_unchecked(HermitianOperator::identity(dim))
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(p))
    }

    /// `|v⟩⟨v|` for a unit vector.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("vector norm {} is not 1", norm2.sqrt())));
        }
        Ok(Self::normalized_unchecked(HermitianOperator::projector_onto(v)))
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        self.op.sub(&other.op).trace_norm()
    }
}

pub fn make_density(mat: CMatrix) -> Result<DensityOperator> {
    DensityOperator::from_matrix(mat)
}

/// Density operator on `A ⊗ B` with cached marginals.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    rho_ab: DensityOperator,
    d_a: usize,
    d_b: usize,
    rho_a: DensityOperator,
    rho_b: DensityOperator,
}

impl BipartiteState {
    pub fn new(rho_ab: DensityOperator, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidInput("local dimensions must be positive".into()));
        }
        if rho_ab.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                actual: rho_ab.dim(),
            });
        }
        let rho_a = DensityOperator::normalized_unchecked(rho_ab.op().partial_trace(&[d_a, d_b], &[0])?);
        let rho_b = DensityOperator::normalized_unchecked(rho_ab.op().partial_trace(&[d_a, d_b], &[1])?);
        Ok(Self {
            rho_ab,
            d_a,
            d_b,
            rho_a,
            rho_b,
        })
    }

    pub fn from_matrix(mat: CMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(DensityOperator::from_matrix(mat)?, d_a, d_b)
    }

    pub fn product(a: &DensityOperator, b: &DensityOperator) -> Self {
        let ab = DensityOperator::normalized_unchecked(a.op().tensor(b.op()));
        Self::new(ab, a.dim(), b.dim()).expect("dimensions agree by construction")
    }

    pub fn rho_ab(&self) -> &DensityOperator {
        &self.rho_ab
    }

    pub fn rho_a(&self) -> &DensityOperator {
        &self.rho_a
    }

    pub fn rho_b(&self) -> &DensityOperator {
        &self.rho_b
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.d_a, self.d_b]
    }

    /// The same state with the roles of A and B exchanged.
    pub fn swap(&self) -> Self {
        let op = self
            .rho_ab
            .op()
            .permute(&[self.d_a, self.d_b], &[1, 0])
            .expect("dimensions agree by construction");
        Self::new(DensityOperator::normalized_unchecked(op), self.d_b, self.d_a)
            .expect("dimensions agree by construction")
    }

    /// `ρ_{AB} ⊗ ρ'_{A'B'}` regrouped as a state on `(AA') ⊗ (BB')`.
    pub fn tensor(&self, other: &Self) -> Self {
        let joint = self.rho_ab.op().tensor(other.rho_ab.op());
        let op = joint
            .permute(&[self.d_a, self.d_b, other.d_a, other.d_b], &[0, 2, 1, 3])
            .expect("dimensions agree by construction");
        Self::new(
            DensityOperator::normalized_unchecked(op),
            self.d_a * other.d_a,
            self.d_b * other.d_b,
        )
        .expect("dimensions agree by construction")
    }

    /// `ρ_A ⊗ ρ_B`.
    pub fn marginal_product(&self) -> HermitianOperator {
        self.rho_a.op().tensor(self.rho_b.op())
    }

    /// Applies local channels given by Kraus operators. An empty list is the
    /// identity channel.
    pub fn apply_local_channels(&self, kraus_a: &[CMatrix], kraus_b: &[CMatrix]) -> Result<Self> {
        let id_a = [CMatrix::identity(self.d_a, self.d_a)];
        let id_b = [CMatrix::identity(self.d_b, self.d_b)];
        let ka = if kraus_a.is_empty() { &id_a[..] } else { kraus_a };
        let kb = if kraus_b.is_empty() { &id_b[..] } else { kraus_b };
        let out_a = ka[0].nrows();
        let out_b = kb[0].nrows();
        let mut acc = CMatrix::zeros(out_a * out_b, out_a * out_b);
        for a in ka {
            for b in kb {
                let k = a.kronecker(b);
                acc += &k * self.rho_ab.op().matrix() * k.adjoint();
            }
        }
        Self::new(
            DensityOperator::new(HermitianOperator::new(acc)?)?,
            out_a,
            out_b,
        )
    }
}

/// Probability mass function, either a vector or a joint table stored
/// row-major with `rows × cols` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    weights: Vec<f64>,
    rows: usize,
    cols: usize,
    joint: bool,
}

impl Pmf {
    fn validate(weights: &[f64]) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty PMF".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!("PMF entry {w} is not a probability")));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidInput(format!("PMF sums to {s}, not 1")));
        }
        Ok(())
    }

    pub fn vector(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights)?;
        let n = weights.len();
        Ok(Self {
            weights,
            rows: n,
            cols: 1,
            joint: false,
        })
    }

    pub fn joint(table: &[Vec<f64>]) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || table.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("joint PMF must be a non-empty rectangular table".into()));
        }
        let weights: Vec<f64> = table.iter().flatten().copied().collect();
        Self::validate(&weights)?;
        Ok(Self {
            weights,
            rows,
            cols,
            joint: true,
        })
    }

    /// The diagonal joint `P(x, y) = p(x) δ_{xy}`.
    pub fn copy_joint(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let table: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { p[i] } else { 0.0 }).collect())
            .collect();
        Self::joint(&table)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_joint(&self) -> bool {
        self.joint
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.cols + y]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.rows).map(|x| (0..self.cols).map(|y| self.get(x, y)).sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.cols).map(|y| (0..self.rows).map(|x| self.get(x, y)).sum()).collect()
    }

    /// The joint with the roles of X and Y exchanged.
    pub fn transpose(&self) -> Self {
        let table: Vec<Vec<f64>> = (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).collect())
            .collect();
        Self {
            weights: table.into_iter().flatten().collect(),
            rows: self.cols,
            cols: self.rows,
            joint: self.joint,
        }
    }
}

pub fn pure_bipartite(amplitudes: &[Complex64], d_a: usize, d_b: usize) -> Result<BipartiteState> {
    if amplitudes.len() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            actual: amplitudes.len(),
        });
    }
    BipartiteState::new(DensityOperator::pure(amplitudes)?, d_a, d_b)
}

/// Diagonal embedding of a joint PMF in the computational product basis.
pub fn cc_state(joint: &Pmf) -> Result<BipartiteState> {
    if !joint.is_joint() {
        return Err(Error::InvalidInput("cc_state needs a joint (2-D) PMF".into()));
    }
    let (rows, cols) = joint.shape();
    let op = HermitianOperator::from_real_diagonal(joint.weights());
    BipartiteState::new(DensityOperator::normalized_unchecked(op), rows, cols)
}

/// `G G† / tr(G G†)` with `G` a `dim × rank` matrix of standard complex
/// Gaussian entries.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidInput(format!("rank {rank} outside 1..={dim}")));
    }
    let g = CMatrix::from_fn(dim, rank, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let m = &g * g.adjoint();
    Ok(DensityOperator::normalized_unchecked(HermitianOperator::from_matrix_unchecked(m)))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_density_seeded(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density(dim, rank, &mut seeded_rng(seed))
}

/// Full-rank random bipartite state.
pub fn random_bipartite(d_a: usize, d_b: usize, seed: u64) -> BipartiteState {
    let rho = random_density_seeded(d_a * d_b, d_a * d_b, seed).expect("rank within range");
    BipartiteState::new(rho, d_a, d_b).expect("dimensions agree by construction")
}

/// Pure state on `A ⊗ B ⊗ C` with `tr_C = ρ_AB`.
#[derive(Debug, Clone)]
pub struct Purification {
    pub amplitudes: Vec<Complex64>,
    pub d_a: usize,
    pub d_b: usize,
    pub d_c: usize,
}

impl Purification {
    pub fn density(&self) -> HermitianOperator {
        HermitianOperator::projector_onto(&self.amplitudes)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.d_a, self.d_b, self.d_c]
    }

    /// Reduced state on the listed subsystems (0 = A, 1 = B, 2 = C).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let op = self.density().partial_trace(&self.dims(), keep)?;
        Ok(DensityOperator::normalized_unchecked(op))
    }
}

/// `|ρ⟩ = Σ_i √λ_i |e_i⟩_{AB} |i⟩_C` over the support of `ρ_AB`, eigenvalues
/// descending, each eigenvector phased so its first non-negligible component
/// is real positive.
pub fn purify(state: &BipartiteState) -> Purification {
    let op = state.rho_ab().op();
    let sp = op.spectrum();
    let d = op.dim();
    let rank = op.rank();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); d * rank];
    for i in 0..rank {
        let lam = sp.eigenvalues[i].max(0.0).sqrt();
        let col = sp.eigenvectors.column(i);
        let pivot = col.iter().find(|z| z.norm() > 1e-12).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for ab in 0..d {
            amplitudes[ab * rank + i] = col[ab] * phase * lam;
        }
    }
    Purification {
        amplitudes,
        d_a: state.d_a(),
        d_b: state.d_b(),
        d_c: rank,
    }
}

/// Structural classes with closed-form doubly minimized mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Product,
    Pure,
    CopyCc,
    AcIndependent,
    Generic,
}

const KIND_TOL: f64 = 1e-10;

pub fn is_product(state: &BipartiteState) -> bool {
    state.rho_ab().op().sub(&state.marginal_product()).trace_norm() <= KIND_TOL
}

/// Diagonal in the computational basis with at most one nonzero entry per
/// row and per column of the joint table.
pub fn copy_cc_pmf(state: &BipartiteState) -> Option<Vec<f64>> {
    let m = state.rho_ab().op().matrix();
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)].norm() > KIND_TOL {
                return None;
            }
        }
    }
    let (da, db) = (state.d_a(), state.d_b());
    let w = |x: usize, y: usize| m[(x * db + y, x * db + y)].re;
    for x in 0..da {
        if (0..db).filter(|&y| w(x, y) > KIND_TOL).count() > 1 {
            return None;
        }
    }
    for y in 0..db {
        if (0..da).filter(|&x| w(x, y) > KIND_TOL).count() > 1 {
            return None;
        }
    }
    let mut p: Vec<f64> = (0..da).map(|x| (0..db).map(|y| w(x, y)).sum()).collect();
    p.retain(|&v| v > KIND_TOL);
    Some(p)
}

pub fn is_ac_independent(state: &BipartiteState) -> bool {
    let pur = purify(state);
    let ac = match pur.reduced(&[0, 2]) {
        Ok(ac) => ac,
        Err(_) => return false,
    };
    let c = match pur.reduced(&[2]) {
        Ok(c) => c,
        Err(_) => return false,
    };
    ac.op().sub(&state.rho_a().op().tensor(c.op())).trace_norm() <= KIND_TOL
}

pub fn classify(state: &BipartiteState) -> StateKind {
    if is_product(state) {
        StateKind::Product
    } else if state.rho_ab().op().rank() == 1 {
        StateKind::Pure
    } else if copy_cc_pmf(state).is_some() {
        StateKind::CopyCc
    } else if is_ac_independent(state) {
        StateKind::AcIndependent
    } else {
        StateKind::Generic
    }
}
