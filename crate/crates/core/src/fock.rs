//! Truncated Fock-space linear algebra: ladder operators, displacement
//! operators and displaced number states, and the closed-form displacement
//! matrix elements.
//!
//! Spin-boson vectors are stored interleaved, `index = 2n + s` with `s = 0`
//! for `|e⟩` (σ_3 = +1) and `s = 1` for `|g⟩` (σ_3 = −1). The σ_1 eigenstates
//! are `|λ = ±1⟩ = (|e⟩ ± |g⟩)/√2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{ModelParams, Sign};
use crate::specfun::{self, SpecFunError};

pub type C64 = Complex64;
/// Photon-only state vector over Fock indices `0..=n_max`.
pub type FockVector = DVector<C64>;

/// Largest supported |θ| for the displacement operator.
pub const MAX_DISPLACEMENT: f64 = 10.0;

/// Interior deviation above which a displacement is reported as leaking past
/// the truncation.
pub const LEAKAGE_TOL: f64 = 1.0e-11;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("truncation n_max = {n_max} is smaller than guard = {guard}")]
    InvalidTruncation { n_max: usize, guard: usize },
    #[error("Fock index {n} lies outside the guarded support (largest usable index {interior})")]
    OutOfSupport { n: usize, interior: usize },
    #[error("|theta| = {theta} exceeds the supported maximum {MAX_DISPLACEMENT}")]
    DisplacementTooLarge { theta: f64 },
    #[error(
        "displacement leaks past the truncation edge: interior deviation {deviation:e} with guard \
         {guard} (recommended guard >= {recommended})"
    )]
    Leakage {
        deviation: f64,
        guard: usize,
        recommended: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Fock-space cutoff. Indices `0..=n_max` are kept; the top `guard` levels
/// absorb the spread of displaced states and are not used for physics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub n_max: usize,
    pub guard: usize,
}

impl TruncationConfig {
    pub fn new(n_max: usize, guard: usize) -> Result<Self, FockError> {
        if guard > n_max {
            return Err(FockError::InvalidTruncation { n_max, guard });
        }
        Ok(Self { n_max, guard })
    }

    /// Default guard `ceil(10 θ²) + 10`.
    pub fn default_guard(theta: f64) -> usize {
        (10.0 * theta * theta).ceil() as usize + 10
    }

    /// Guard for displacing states up to `max_index`: the default, widened to
    /// cover the `~2θ√n` spread of highly excited displaced states.
    pub fn recommended_guard(theta: f64, max_index: usize) -> usize {
        let spread = (4.0 * theta.abs() * (max_index as f64).sqrt()).ceil() as usize + 10;
        Self::default_guard(theta).max(spread)
    }

    /// Cutoff that keeps `max_index` usable with the recommended guard for `theta`.
    pub fn for_indices(max_index: usize, theta: f64) -> Self {
        let guard = Self::recommended_guard(theta, max_index);
        Self {
            n_max: max_index + guard,
            guard,
        }
    }

    /// Number of retained Fock levels.
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Dimension of the spin ⊗ Fock space.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Largest index with a full guard above it.
    pub fn interior(&self) -> usize {
        self.n_max - self.guard
    }

    pub fn check_index(&self, n: usize) -> Result<(), FockError> {
        if n > self.interior() {
            Err(FockError::OutOfSupport {
                n,
                interior: self.interior(),
            })
        } else {
            Ok(())
        }
    }
}

/// Dense complex square matrix on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn from_complex(entries: DMatrix<C64>) -> Self {
        assert_eq!(entries.nrows(), entries.ncols(), "operator must be square");
        Self { entries }
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Self {
        Self::from_complex(entries.map(|v| C64::new(v, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_complex(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_complex(self.entries.adjoint())
    }

    pub fn matmul(&self, rhs: &OperatorMatrix) -> Self {
        Self::from_complex(&self.entries * &rhs.entries)
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Self {
        Self::from_complex(&self.entries + &rhs.entries)
    }

    pub fn sub(&self, rhs: &OperatorMatrix) -> Self {
        Self::from_complex(&self.entries - &rhs.entries)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_complex(&self.entries * factor)
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.entries * v
    }

    /// Largest |entry| difference over the leading `limit × limit` block.
    pub fn max_abs_diff(&self, other: &OperatorMatrix, limit: usize) -> f64 {
        let k = limit.min(self.dim()).min(other.dim());
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let a = &self.entries;
        (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| (a[(i, j)] - a[(j, i)].conj()).norm() <= tol))
    }

    /// Compressed sparse row copy without the exact zeros.
    pub fn to_sparse(&self) -> SparseOperator {
        let n = self.dim();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.entries[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseOperator::from_triplets(n, triplets)
    }
}

/// Compressed sparse row matrix used inside integrators.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) out of range for dim {dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = self · x`.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim);
        self.apply_into(x.as_slice(), out.as_mut_slice());
        out
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim {
            let mut row = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * x[self.cols[k]];
            }
            acc += x[i].conj() * row;
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vals: self.vals.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn to_dense(&self) -> OperatorMatrix {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        OperatorMatrix::from_complex(m)
    }
}

/// Two-level state in the σ_3 eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    /// σ_3 = +1
    Excited,
    /// σ_3 = −1
    Ground,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Excited => 0,
            Spin::Ground => 1,
        }
    }
}

/// Complex amplitudes over (Fock index, spin) on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinFockVector {
    trunc: TruncationConfig,
    amps: DVector<C64>,
}

/// Tolerance on `|‖ψ‖ − 1|` for a vector to count as a state.
pub const STATE_NORM_TOL: f64 = 1.0e-8;

impl SpinFockVector {
    pub fn zeros(trunc: TruncationConfig) -> Self {
        Self {
            trunc,
            amps: DVector::zeros(trunc.dim()),
        }
    }

    pub fn from_amps(trunc: TruncationConfig, amps: DVector<C64>) -> Result<Self, FockError> {
        if amps.len() != trunc.dim() {
            return Err(FockError::Dimension {
                expected: trunc.dim(),
                got: amps.len(),
            });
        }
        Ok(Self { trunc, amps })
    }

    /// `|n⟩ ⊗ |spin⟩`.
    pub fn basis(trunc: TruncationConfig, n: usize, spin: Spin) -> Result<Self, FockError> {
        if n > trunc.n_max {
            return Err(FockError::OutOfSupport {
                n,
                interior: trunc.n_max,
            });
        }
        let mut v = Self::zeros(trunc);
        v.amps[Self::index(n, spin)] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// The physical vacuum with the atom in its ground state.
    pub fn vacuum_ground(trunc: TruncationConfig) -> Self {
        Self::basis(trunc, 0, Spin::Ground).expect("index 0 always fits")
    }

    pub fn index(n: usize, spin: Spin) -> usize {
        2 * n + spin.offset()
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn into_amps(self) -> DVector<C64> {
        self.amps
    }

    pub fn get(&self, n: usize, spin: Spin) -> C64 {
        self.amps[Self::index(n, spin)]
    }

    /// Photon amplitudes `⟨n, spin|ψ⟩`.
    pub fn photon_component(&self, spin: Spin) -> FockVector {
        DVector::from_fn(self.trunc.fock_dim(), |n, _| self.get(n, spin))
    }

    /// Photon amplitudes `⟨n, λ|ψ⟩` in the σ_1 basis.
    pub fn sigma1_component(&self, lambda: Sign) -> FockVector {
        let s = lambda.value();
        DVector::from_fn(self.trunc.fock_dim(), |n, _| {
            (self.get(n, Spin::Excited) + self.get(n, Spin::Ground) * s) * SQRT_HALF
        })
    }

    /// Inverse of [`Self::sigma1_component`]: `|ψ⟩ = |φ_+⟩|+⟩ + |φ_−⟩|−⟩`.
    pub fn from_sigma1_components(
        trunc: TruncationConfig,
        plus: &FockVector,
        minus: &FockVector,
    ) -> Result<Self, FockError> {
        for v in [plus, minus] {
            if v.len() != trunc.fock_dim() {
                return Err(FockError::Dimension {
                    expected: trunc.fock_dim(),
                    got: v.len(),
                });
            }
        }
        let mut out = Self::zeros(trunc);
        for n in 0..trunc.fock_dim() {
            out.amps[Self::index(n, Spin::Excited)] = (plus[n] + minus[n]) * SQRT_HALF;
            out.amps[Self::index(n, Spin::Ground)] = (plus[n] - minus[n]) * SQRT_HALF;
        }
        Ok(out)
    }

    /// `|φ⟩ ⊗ |λ⟩` for a photon vector `φ`.
    pub fn product_sigma1(trunc: TruncationConfig, photon: &FockVector, lambda: Sign) -> Result<Self, FockError> {
        let zero = DVector::zeros(trunc.fock_dim());
        match lambda {
            Sign::Plus => Self::from_sigma1_components(trunc, photon, &zero),
            Sign::Minus => Self::from_sigma1_components(trunc, &zero, photon),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_state(&self) -> bool {
        (self.norm() - 1.0).abs() <= STATE_NORM_TOL
    }

    pub fn normalized(&self) -> Self {
        Self {
            trunc: self.trunc,
            amps: &self.amps / C64::new(self.norm(), 0.0),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinFockVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &SpinFockVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `Σ_n |ψ(n, spin)|²`.
    pub fn spin_population(&self, spin: Spin) -> f64 {
        (0..self.trunc.fock_dim()).map(|n| self.get(n, spin).norm_sqr()).sum()
    }

    /// Weight on Fock levels above `trunc.interior()`.
    pub fn guard_weight(&self) -> f64 {
        ((self.trunc.interior() + 1)..=self.trunc.n_max)
            .map(|n| self.get(n, Spin::Excited).norm_sqr() + self.get(n, Spin::Ground).norm_sqr())
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = SpinFockFile {
            n_max: self.trunc.n_max,
            guard: self.trunc.guard,
            basis: BASIS_DESCRIPTION.to_string(),
            amps: self.amps.iter().map(|c| [c.re, c.im]).collect(),
        };
        serde_json::to_value(file).expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let file: SpinFockFile = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        if file.basis != BASIS_DESCRIPTION {
            return Err(format!("unsupported basis description {:?}", file.basis));
        }
        let trunc = TruncationConfig::new(file.n_max, file.guard).map_err(|e| e.to_string())?;
        let amps = DVector::from_iterator(file.amps.len(), file.amps.iter().map(|p| C64::new(p[0], p[1])));
        Self::from_amps(trunc, amps).map_err(|e| e.to_string())
    }
}

/// Basis tag stored alongside serialized vectors.
pub const BASIS_DESCRIPTION: &str = "interleaved index 2n+s; s=0 |e> (sigma_3=+1), s=1 |g> (sigma_3=-1)";

#[derive(Debug, Serialize, Deserialize)]
struct SpinFockFile {
    n_max: usize,
    guard: usize,
    basis: String,
    amps: Vec<[f64; 2]>,
}

/// Annihilation and creation operators `(a, a†)` with `⟨n−1|a|n⟩ = √n`.
pub fn ladder(trunc: TruncationConfig) -> (OperatorMatrix, OperatorMatrix) {
    let a = annihilation_real(trunc.fock_dim());
    let ad = a.transpose();
    (OperatorMatrix::from_real(&a), OperatorMatrix::from_real(&ad))
}

fn annihilation_real(dim: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(G)` by scaling and squaring with a Taylor core. The scaled generator
/// has 1-norm at most 1/2, so stopping once a term's 1-norm drops below
/// `1e-18` bounds the remainder by twice that.
pub fn expm(generator: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = generator.nrows();
    let nrm = norm1(generator);
    let squarings = if nrm > 0.5 {
        (nrm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = generator / 2f64.powi(squarings);
    let mut result = DMatrix::<f64>::identity(dim, dim);
    let mut term = DMatrix::<f64>::identity(dim, dim);
    for k in 1..=60 {
        term = &term * &scaled / k as f64;
        result += &term;
        if norm1(&term) < 1.0e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Real matrix of `D(θ) = exp(θ(a† − a))` on `0..=n_max`, without the edge
/// check.
pub fn displacement_real(trunc: TruncationConfig, theta: f64) -> Result<DMatrix<f64>, FockError> {
    if !theta.is_finite() || theta.abs() > MAX_DISPLACEMENT {
        return Err(FockError::DisplacementTooLarge { theta });
    }
    let a = annihilation_real(trunc.fock_dim());
    let gen = (a.transpose() - a) * theta;
    Ok(expm(&gen))
}

/// Deviation of the interior block of `d` (computed on `trunc`) from the
/// same displacement on a cutoff lowered by `max(1, guard/2)` levels. Small
/// values mean the edge does not reach the interior.
pub fn truncation_deviation(trunc: TruncationConfig, theta: f64, d: &DMatrix<f64>) -> f64 {
    let reduce = (trunc.guard / 2).max(1);
    if trunc.n_max < reduce {
        return f64::INFINITY;
    }
    let smaller = TruncationConfig {
        n_max: trunc.n_max - reduce,
        guard: trunc.guard.saturating_sub(reduce),
    };
    let Ok(ds) = displacement_real(smaller, theta) else {
        return f64::INFINITY;
    };
    let k = trunc.interior().min(smaller.n_max);
    let mut worst = 0.0f64;
    for i in 0..=k {
        for j in 0..=k {
            worst = worst.max((d[(i, j)] - ds[(i, j)]).abs());
        }
    }
    worst
}

/// `D(θ) = exp(θ(a† − a))`. Fails with [`FockError::Leakage`] when the
/// interior block is sensitive to where the space is cut off.
pub fn displacement(trunc: TruncationConfig, theta: f64) -> Result<OperatorMatrix, FockError> {
    let d = checked_displacement_real(trunc, theta)?;
    Ok(OperatorMatrix::from_real(&d))
}

pub(crate) fn checked_displacement_real(trunc: TruncationConfig, theta: f64) -> Result<DMatrix<f64>, FockError> {
    let d = displacement_real(trunc, theta)?;
    if theta != 0.0 {
        let deviation = truncation_deviation(trunc, theta, &d);
        if deviation > LEAKAGE_TOL {
            return Err(FockError::Leakage {
                deviation,
                guard: trunc.guard,
                recommended: TruncationConfig::recommended_guard(theta, trunc.interior()),
            });
        }
    }
    Ok(d)
}

/// Closed form `⟨m|exp(θ(a† − a))|n⟩ = √(n!/m!) θ^{m−n} e^{−θ²/2} L_n^{(m−n)}(θ²)`
/// for `m ≥ n`, and `(−1)^{n−m} ⟨n|D(θ)|m⟩` for `m < n`. Evaluated in log
/// space so large indices do not overflow.
pub fn displaced_matrix_element(m: u64, n: u64, theta: f64) -> Result<f64, FockError> {
    if !theta.is_finite() {
        return Err(FockError::DisplacementTooLarge { theta });
    }
    if m < n {
        let v = displaced_matrix_element(n, m, theta)?;
        return Ok(if (n - m) % 2 == 0 { v } else { -v });
    }
    let diff = m - n;
    if theta == 0.0 {
        return Ok(if diff == 0 { 1.0 } else { 0.0 });
    }
    let x = theta * theta;
    let lag = specfun::assoc_laguerre_report(n, diff, x)?;
    if lag.value == 0.0 {
        return Ok(0.0);
    }
    let ln_mag = 0.5 * (specfun::log_factorial(n) - specfun::log_factorial(m)) + diff as f64 * theta.abs().ln()
        - 0.5 * x
        + lag.ln_abs();
    let mut sign = lag.signum();
    if theta < 0.0 && diff % 2 == 1 {
        sign = -sign;
    }
    Ok(sign * ln_mag.exp())
}

/// `|[n; α_λ]⟩ = exp((g/ω) λ (a − a†)) |n⟩ = D(−λ g/ω)|n⟩`, photon part only.
pub fn displaced_number_state(
    n: usize,
    lambda: Sign,
    params: &ModelParams,
    trunc: TruncationConfig,
) -> Result<FockVector, FockError> {
    trunc.check_index(n)?;
    let d = checked_displacement_real(trunc, -lambda.value() * params.beta())?;
    Ok(DVector::from_fn(trunc.fock_dim(), |k, _| C64::new(d[(k, n)], 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coherent_column(theta: f64, k: usize) -> f64 {
        // e^{−θ²/2} θ^k / √k!, by direct recursion
        let mut v = (-0.5 * theta * theta).exp();
        for j in 1..=k {
            v *= theta / (j as f64).sqrt();
        }
        v
    }

    #[test]
    fn ladder_entries() {
        let t = TruncationConfig::new(10, 0).unwrap();
        let (a, ad) = ladder(t);
        assert_eq!(a.get(0, 1).re, 1.0);
        assert!((ad.get(2, 1).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ad, a.adjoint());
        let comm = a.matmul(&ad).sub(&ad.matmul(&a));
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((comm.get(i, j).re - expect).abs() < 1e-13);
            }
        }
        // the commutator fails only at the edge
        assert!((comm.get(10, 10).re - (-10.0)).abs() < 1e-12);
    }

    #[test]
    fn displacement_identity_at_zero() {
        let t = TruncationConfig::new(20, 10).unwrap();
        let d = displacement(t, 0.0).unwrap();
        assert_eq!(d, OperatorMatrix::identity(21));
    }

    #[test]
    fn displacement_vacuum_column_is_coherent() {
        for &theta in &[0.3, 1.0, 2.0] {
            let t = TruncationConfig::for_indices(30, theta);
            let d = displacement(t, theta).unwrap();
            for k in 0..=30 {
                assert!((d.get(k, 0).re - coherent_column(theta, k)).abs() < 1e-12, "θ={theta} k={k}");
            }
        }
    }

    #[test]
    fn displacement_inverse_and_composition() {
        let t = TruncationConfig::for_indices(30, 1.5);
        let dp = displacement(t, 0.7).unwrap();
        let dm = displacement(t, -0.7).unwrap();
        let id = OperatorMatrix::identity(t.fock_dim());
        assert!(dp.matmul(&dm).max_abs_diff(&id, 31) < 1e-9);
        // D(θ1) D(θ2) = D(θ1 + θ2), no phase for collinear real displacements
        let d1 = displacement(t, 0.4).unwrap();
        let d2 = displacement(t, 0.3).unwrap();
        assert!(d1.matmul(&d2).max_abs_diff(&dp, 31) < 1e-8);
        // orthogonal, real
        assert!(dp.entries().iter().all(|c| c.im == 0.0));
        assert!(dp.adjoint().max_abs_diff(&dm, 31) < 1e-9);
    }

    #[test]
    fn displacement_reports_leakage() {
        let t = TruncationConfig::new(12, 2).unwrap();
        match displacement(t, 2.0) {
            Err(FockError::Leakage { deviation, recommended, .. }) => {
                assert!(deviation > LEAKAGE_TOL);
                assert_eq!(recommended, 50);
            }
            other => panic!("expected leakage error, got {other:?}"),
        }
        assert!(matches!(
            displacement(t, 11.0),
            Err(FockError::DisplacementTooLarge { .. })
        ));
    }

    #[test]
    fn matrix_element_trivial_cases() {
        for n in 0..10 {
            assert_eq!(displaced_matrix_element(n, n, 0.0).unwrap(), 1.0);
        }
        let th: f64 = 0.8;
        let v = displaced_matrix_element(1, 0, th).unwrap();
        assert!((v - th * (-0.5 * th * th).exp()).abs() < 1e-15);
        let v = displaced_matrix_element(0, 1, th).unwrap();
        assert!((v + th * (-0.5 * th * th).exp()).abs() < 1e-15);
    }

    #[test]
    fn matrix_elements_match_expm() {
        for &theta in &[0.1, 0.5, 1.0, 2.0] {
            let t = TruncationConfig::for_indices(40, theta);
            let d = displacement(t, theta).unwrap();
            for m in 0..=40u64 {
                for n in 0..=40u64 {
                    let closed = displaced_matrix_element(m, n, theta).unwrap();
                    let oracle = d.get(m as usize, n as usize).re;
                    assert!((closed - oracle).abs() < 1e-9, "θ={theta} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn matrix_element_large_indices_stay_finite() {
        let v = displaced_matrix_element(10_050, 10_000, 0.05).unwrap();
        assert!(v.is_finite());
        assert!(v.abs() <= 1.0);
    }

    #[test]
    fn displaced_number_states() {
        let trunc = TruncationConfig::for_indices(20, 2.0);
        let p0 = ModelParams::new(1.0, 0.2, 0.0).unwrap();
        let s = displaced_number_state(3, Sign::Plus, &p0, trunc).unwrap();
        for k in 0..trunc.fock_dim() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((s[k].re - expect).abs() < 1e-15);
        }
        let p = ModelParams::new(1.0, 0.2, 1.0).unwrap();
        for n in [0usize, 5, 20] {
            let plus = displaced_number_state(n, Sign::Plus, &p, trunc).unwrap();
            let minus = displaced_number_state(n, Sign::Minus, &p, trunc).unwrap();
            for s in [&plus, &minus] {
                let nrm = s.norm();
                assert!(nrm <= 1.0 + 1e-12 && nrm >= 1.0 - 1e-9);
            }
            let overlap = plus.dotc(&minus).re;
            let expect = displaced_matrix_element(n as u64, n as u64, p.theta()).unwrap();
            assert!((overlap - expect).abs() < 1e-10, "n={n}");
        }
        let vac = displaced_number_state(0, Sign::Minus, &p, trunc).unwrap();
        assert!((vac[0].re - (-0.5f64).exp()).abs() < 1e-12);
        assert!(matches!(
            displaced_number_state(trunc.interior() + 1, Sign::Plus, &p, trunc),
            Err(FockError::OutOfSupport { .. })
        ));
    }

    #[test]
    fn spin_views_roundtrip() {
        let t = TruncationConfig::new(4, 0).unwrap();
        let amps = DVector::from_fn(t.dim(), |i, _| C64::new(i as f64, -(i as f64) * 0.5));
        let v = SpinFockVector::from_amps(t, amps).unwrap();
        let back = SpinFockVector::from_sigma1_components(t, &v.sigma1_component(Sign::Plus), &v.sigma1_component(Sign::Minus))
            .unwrap();
        assert!((&back.amps - &v.amps).norm() < 1e-13);
        let g = SpinFockVector::vacuum_ground(t);
        assert_eq!(g.spin_population(Spin::Ground), 1.0);
        let plus = g.sigma1_component(Sign::Plus);
        let minus = g.sigma1_component(Sign::Minus);
        assert!((plus[0].re - SQRT_HALF).abs() < 1e-15);
        assert!((minus[0].re + SQRT_HALF).abs() < 1e-15);
    }

    #[test]
    fn sparse_matches_dense() {
        let t = TruncationConfig::new(6, 0).unwrap();
        let (a, ad) = ladder(t);
        let x = a.add(&ad);
        let sp = x.to_sparse();
        assert_eq!(sp.nnz(), 12);
        let v = DVector::from_fn(7, |i, _| C64::new(1.0 + i as f64, 0.5));
        assert!((sp.apply(&v) - x.apply(&v)).norm() < 1e-14);
        assert_eq!(sp.to_dense(), x);
    }

    #[test]
    fn json_roundtrip() {
        let t = TruncationConfig::new(3, 1).unwrap();
        let v = SpinFockVector::basis(t, 2, Spin::Excited).unwrap();
        let back = SpinFockVector::from_json(&v.to_json()).unwrap();
        assert_eq!(back, v);
        let mut bad = v.to_json();
        bad["basis"] = serde_json::Value::String("other".into());
        assert!(SpinFockVector::from_json(&bad).is_err());
    }

    proptest! {
        #[test]
        fn sign_symmetry(m in 0u64..60, n in 0u64..60, theta in -3.0f64..3.0) {
            let a = displaced_matrix_element(m, n, theta).unwrap();
            let b = displaced_matrix_element(m, n, -theta).unwrap();
            let s = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - s * b).abs() <= 1e-14 * a.abs().max(1e-300) + 1e-300);
        }

        #[test]
        fn composition_invariant(t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
            let t = TruncationConfig::for_indices(20, 2.0);
            let d1 = displacement(t, t1).unwrap();
            let d2 = displacement(t, t2).unwrap();
            let d12 = displacement(t, t1 + t2).unwrap();
            prop_assert!(d1.matmul(&d2).max_abs_diff(&d12, 21) < 1e-8);
        }
    }
}
