//! Hermitian operators with a cached spectral decomposition.
//!
//! All matrix functions act on eigenvalues: `f(A) = V f(Λ) V†`. Functions
//! that are singular at zero (negative powers, logarithms) are taken on the
//! support only, i.e. kernel eigenvalues are mapped to zero.
//!
//! Tensor products use the A-major convention: the basis vector `|a⟩⊗|b⟩`
//! has index `a·d_B + b`.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Entrywise deviation from Hermiticity accepted on construction.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_TOL, 0)` are clamped to zero by PSD-only functions.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

#[derive(Debug, Clone)]
pub struct SupportInfo {
    pub rank: usize,
    pub threshold: f64,
    pub projector: HermitianOperator,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub support: SupportInfo,
}

#[derive(Debug, Clone)]
pub struct HermitianOperator {
    mat: CMatrix,
    spectrum: OnceLock<Arc<Spectrum>>,
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity, then stores the exactly
    /// symmetrized matrix.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                actual: mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let deviation = hermitian_deviation(&mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::from_matrix_unchecked(mat))
    }

    /// Symmetrizes without validation. Use for results of internal
    /// computations that are Hermitian up to rounding.
    pub fn from_matrix_unchecked(mat: CMatrix) -> Self {
        Self {
            mat: symmetrize(&mat),
            spectrum: OnceLock::new(),
        }
    }

    fn with_spectrum(mat: CMatrix, spectrum: Spectrum) -> Self {
        let op = Self::from_matrix_unchecked(mat);
        let _ = op.spectrum.set(Arc::new(spectrum));
        op
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mat = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::from_matrix_unchecked(mat)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![0.0; dim])
    }

    /// Rank-one operator `|v⟩⟨v|` (not normalized).
    pub fn projector_onto(v: &[Complex64]) -> Self {
        let n = v.len();
        let mat = CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self::from_matrix_unchecked(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let eig = self.mat.clone().symmetric_eigen();
            let n = self.dim();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
            Arc::new(Spectrum {
                eigenvalues,
                eigenvectors,
            })
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().eigenvalues
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Default kernel cutoff `dim · max|λ| · ε`.
    pub fn default_cutoff(&self) -> f64 {
        let ev = self.eigenvalues();
        let scale = ev.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
        self.dim() as f64 * scale * f64::EPSILON
    }

    pub fn support_with_cutoff(&self, cutoff: f64) -> SupportInfo {
        SupportInfo {
            rank: self.rank_with_cutoff(cutoff),
            threshold: cutoff,
            projector: self.map_spectrum(|l| if l.abs() > cutoff { 1.0 } else { 0.0 }),
        }
    }

    pub fn support(&self) -> SupportInfo {
        self.support_with_cutoff(self.default_cutoff())
    }

    pub fn rank_with_cutoff(&self, cutoff: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l.abs() > cutoff).count()
    }

    pub fn rank(&self) -> usize {
        self.rank_with_cutoff(self.default_cutoff())
    }

    /// Applies `f` to every eigenvalue. The spectrum of the result is known
    /// and cached.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let sp = self.spectrum();
        let n = self.dim();
        let vals: Vec<f64> = sp.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &sp.eigenvectors;
        let mut scaled = v.clone();
        for j in 0..n {
            let c = Complex64::new(vals[j], 0.0);
            for i in 0..n {
                scaled[(i, j)] *= c;
            }
        }
        let mat = &scaled * v.adjoint();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let spectrum = Spectrum {
            eigenvalues: order.iter().map(|&k| vals[k]).collect(),
            eigenvectors: CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]),
        };
        Self::with_spectrum(mat, spectrum)
    }

    fn check_psd(&self) -> Result<()> {
        let m = self.min_eigenvalue();
        if m < -NEGATIVE_TOL {
            return Err(Error::NegativeEigenvalue { eigenvalue: m });
        }
        Ok(())
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -NEGATIVE_TOL
    }

    /// `A^p` on the support of a PSD operator. `p = 0` gives the support
    /// projector.
    pub fn power_on_support(&self, p: f64) -> Result<Self> {
        self.check_psd()?;
        let cut = self.default_cutoff();
        Ok(self.map_spectrum(|l| if l > cut { l.powf(p) } else { 0.0 }))
    }

    /// `A^p` for a positive definite operator, without any kernel cutoff.
    pub fn power_positive_definite(&self, p: f64) -> Result<Self> {
        let m = self.min_eigenvalue();
        if m <= 0.0 {
            return Err(Error::NegativeEigenvalue { eigenvalue: m });
        }
        Ok(self.map_spectrum(|l| l.powf(p)))
    }

    /// Natural logarithm on the support of a PSD operator.
    pub fn log_on_support(&self) -> Result<Self> {
        self.check_psd()?;
        let cut = self.default_cutoff();
        Ok(self.map_spectrum(|l| if l > cut { l.ln() } else { 0.0 }))
    }

    /// `A^p ln A` on the support of a PSD operator.
    pub fn power_log_on_support(&self, p: f64) -> Result<Self> {
        self.check_psd()?;
        let cut = self.default_cutoff();
        Ok(self.map_spectrum(|l| if l > cut { l.powf(p) * l.ln() } else { 0.0 }))
    }

    pub fn support_projector(&self) -> Self {
        let cut = self.default_cutoff();
        self.map_spectrum(|l| if l.abs() > cut { 1.0 } else { 0.0 })
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        schatten_from_values(self.eigenvalues().iter().map(|l| l.abs()), p)
    }

    /// `Re tr[A B]`.
    pub fn inner(&self, other: &Self) -> f64 {
        trace_product(&self.mat, &other.mat)
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let x = DVector::from_column_slice(v);
        (x.adjoint() * &self.mat * &x)[(0, 0)].re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.mat + &other.mat)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.mat - &other.mat)
    }

    pub fn scale(&self, c: f64) -> Self {
        let sp = self.spectrum.get().map(|s| {
            let mut s = (**s).clone();
            for l in s.eigenvalues.iter_mut() {
                *l *= c;
            }
            if c < 0.0 {
                s.eigenvalues.reverse();
                let n = self.dim();
                let v = s.eigenvectors.clone();
                s.eigenvectors = CMatrix::from_fn(n, n, |i, j| v[(i, n - 1 - j)]);
            }
            s
        });
        let mat = &self.mat * Complex64::new(c, 0.0);
        match sp {
            Some(s) => Self::with_spectrum(mat, s),
            None => Self::from_matrix_unchecked(mat),
        }
    }

    /// `A X A` for a Hermitian `X`.
    pub fn sandwich(&self, x: &Self) -> Self {
        Self::from_matrix_unchecked(&self.mat * &x.mat * &self.mat)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(self.mat.kronecker(&other.mat))
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(partial_trace_matrix(&self.mat, dims, keep)?))
    }

    pub fn permute(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(permute_matrix(&self.mat, dims, perm)?))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}

/// `Re tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

fn schatten_from_values(values: impl Iterator<Item = f64>, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Domain(format!("Schatten index must be positive, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.fold(0.0, f64::max));
    }
    let s: f64 = values.map(|x| if x > 0.0 { x.powf(p) } else { 0.0 }).sum();
    Ok(s.powf(1.0 / p))
}

/// Schatten `p`-(quasi)norm of an arbitrary square matrix via its singular
/// values. `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm_general(m: &CMatrix, p: f64) -> Result<f64> {
    let svd = m.clone().svd(false, false);
    schatten_from_values(svd.singular_values.iter().copied(), p)
}

pub fn schatten_norm(a: &HermitianOperator, p: f64) -> Result<f64> {
    a.schatten_norm(p)
}

pub fn spectral_decompose(a: &HermitianOperator, cutoff: Option<f64>) -> SpectralDecomposition {
    let cutoff = cutoff.unwrap_or_else(|| a.default_cutoff());
    let sp = a.spectrum();
    SpectralDecomposition {
        eigenvalues: sp.eigenvalues.clone(),
        eigenvectors: sp.eigenvectors.clone(),
        support: a.support_with_cutoff(cutoff),
    }
}

pub fn power_on_support(a: &HermitianOperator, p: f64) -> Result<HermitianOperator> {
    a.power_on_support(p)
}

pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    a.tensor(b)
}

pub fn partial_trace(
    a: &HermitianOperator,
    dims: &[usize],
    keep: &[usize],
) -> Result<HermitianOperator> {
    a.partial_trace(dims, keep)
}

fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidInput("subsystem dimensions must be positive".into()));
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            actual: m.nrows(),
        });
    }
    Ok(total)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets of every multi-index over the listed subsystems, enumerated in
/// A-major order of those subsystems.
fn offsets(dims: &[usize], strides: &[usize], which: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &k in which {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &o in &out {
            for d in 0..dims[k] {
                next.push(o + d * strides[k]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems stay in
/// their original order.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidInput(format!("invalid subsystem list {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let st = strides(dims);
    let ok = offsets(dims, &st, &keep_sorted);
    let ot = offsets(dims, &st, &traced);
    let kd = ok.len();
    let mut out = CMatrix::zeros(kd, kd);
    for r in 0..kd {
        for c in 0..kd {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &ot {
                acc += m[(ok[r] + t, ok[c] + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of
/// the input.
pub fn permute_matrix(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let total = check_dims(m, dims)?;
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(Error::InvalidInput(format!("invalid permutation {perm:?}")));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::InvalidInput(format!("invalid permutation {perm:?}")));
        }
        seen[p] = true;
    }
    let map = permutation_index_map(dims, perm);
    Ok(CMatrix::from_fn(total, total, |a, b| m[(map[a], map[b])]))
}

/// For each index of the permuted space, the corresponding index of the
/// original space.
pub fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_st = strides(&new_dims);
    let total: usize = dims.iter().product();
    (0..total)
        .map(|a| {
            let mut old = 0;
            for k in 0..perm.len() {
                let digit = (a / new_st[k]) % new_dims[k];
                old += digit * st[perm[k]];
            }
            old
        })
        .collect()
}

/// Projector onto the eigenspaces of `x` with nonnegative eigenvalues.
/// Eigenvalues within the default cutoff of zero count as nonnegative.
pub fn nonnegative_projector(x: &HermitianOperator) -> HermitianOperator {
    let cut = x.default_cutoff();
    x.map_spectrum(|l| if l >= -cut { 1.0 } else { 0.0 })
}

/// `{X ≥ Y}`.
pub fn nonnegative_part_projector(
    x: &HermitianOperator,
    y: &HermitianOperator,
) -> Result<HermitianOperator> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    Ok(nonnegative_projector(&x.sub(y)))
}

/// `{X ≥ e^t Y}`. Evaluated as `{e^{-t}X − Y ≥ 0}` for `t > 0` so that large
/// thresholds do not overflow.
pub fn threshold_projector(
    x: &HermitianOperator,
    y: &HermitianOperator,
    t: f64,
) -> HermitianOperator {
    let diff = if t > 0.0 {
        x.scale((-t).exp()).sub(y)
    } else {
        x.sub(&y.scale(t.exp()))
    };
    nonnegative_projector(&diff)
}

fn geometric_mean_pd(x: &HermitianOperator, y: &HermitianOperator) -> Result<HermitianOperator> {
    let xh = x.power_positive_definite(0.5)?;
    let xmh = x.power_positive_definite(-0.5)?;
    let inner = xmh.sandwich(y).power_positive_definite(0.5)?;
    Ok(xh.sandwich(&inner))
}

/// Matrix geometric mean `X # Y` of PSD operators. Singular inputs are
/// handled by regularizing with `εI` and extrapolating `ε → 0` in `√ε`.
pub fn geometric_mean(x: &HermitianOperator, y: &HermitianOperator) -> Result<HermitianOperator> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    x.check_psd()?;
    y.check_psd()?;
    let n = x.dim();
    if x.rank() == n && y.rank() == n {
        return geometric_mean_pd(x, y);
    }
    let ts = [1e-3_f64, 1e-4, 1e-5];
    let mut vals = Vec::with_capacity(3);
    for &t in &ts {
        let shift = HermitianOperator::identity(n).scale(t * t);
        vals.push(geometric_mean_pd(&x.add(&shift), &y.add(&shift))?);
    }
    // Lagrange extrapolation of a quadratic in t to t = 0.
    let mut acc = CMatrix::zeros(n, n);
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= ts[j] / (ts[j] - ts[i]);
            }
        }
        acc += vals[i].matrix() * Complex64::new(w, 0.0);
    }
    Ok(HermitianOperator::from_matrix_unchecked(acc))
}
