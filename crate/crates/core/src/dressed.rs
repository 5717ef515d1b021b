//! The strong-coupling unperturbed problem `H_0 = ω a†a + g σ_1 (a† + a)`:
//! its propagator `U_F`, the band structure produced by the level splitting,
//! and decomposition of states onto the band eigenstates
//!
//! ```text
//! |ψ_n; σ⟩ = (σ |[n; α_+]⟩|+⟩ + |[n; α_−]⟩|−⟩) / √2,   E_{n,σ} = σ (Δ/2) e^{−θ²/2} L_n(θ²)
//! ```
//!
//! with `|[n; α_λ]⟩ = D(−λ g/ω)|n⟩` and `θ = 2g/ω`. These are superpositions of
//! two macroscopically displaced field states entangled with the atom.
//!
//! The full evolution is `U(t) = U_F(t) · (band-amplitude evolution)`; the
//! second factor lives in [`crate::dynamics`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{self, FockError, FockVector, SpinFockVector, TruncationConfig, C64};
pub use crate::params::{ModelParams, Sign};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Residual norm above which a decomposition is flagged as incomplete.
pub const DECOMPOSITION_RESIDUAL_WARN: f64 = 1.0e-6;

/// Largest Poisson tail tolerated by [`initial_amplitudes`].
pub const INITIAL_TAIL_TOL: f64 = 1.0e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressedError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("Poisson tail beyond n_max = {n_max} is {tail:e}; use n_max >= {required}")]
    TailTooHeavy { tail: f64, n_max: usize, required: usize },
    #[error("input is not a normalized state (norm {norm})")]
    NotAState { norm: f64 },
}

/// A dressed level `(n, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BandLabel {
    pub n: usize,
    pub sigma: Sign,
}

impl BandLabel {
    pub fn new(n: usize, sigma: Sign) -> Self {
        Self { n, sigma }
    }

    /// Position in band-ordered storage: by `n`, then `σ = −1` before `σ = +1`.
    pub fn index(&self) -> usize {
        2 * self.n
            + match self.sigma {
                Sign::Minus => 0,
                Sign::Plus => 1,
            }
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            n: i / 2,
            sigma: if i % 2 == 0 { Sign::Minus } else { Sign::Plus },
        }
    }

    /// Short track name, e.g. `band_3_p1` / `band_3_m1`.
    pub fn track_name(&self) -> String {
        let s = match self.sigma {
            Sign::Plus => "p1",
            Sign::Minus => "m1",
        };
        format!("band_{}_{}", self.n, s)
    }
}

impl std::fmt::Display for BandLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {:+})", self.n, self.sigma.as_i32())
    }
}

/// Coefficients `a_{n,σ}` over all labels with `n ≤ n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition {
    n_max: usize,
    coeffs: Vec<C64>,
    /// Norm of the part of the source state not captured by the retained bands.
    pub residual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRecord {
    n: usize,
    sigma: i32,
    re: f64,
    im: f64,
}

impl BandDecomposition {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            n_max,
            coeffs: vec![C64::new(0.0, 0.0); 2 * (n_max + 1)],
            residual: 0.0,
        }
    }

    pub fn from_coeffs(n_max: usize, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), 2 * (n_max + 1), "coefficient count must be 2(n_max+1)");
        Self {
            n_max,
            coeffs,
            residual: 0.0,
        }
    }

    /// Unit vector at `label`.
    pub fn single(n_max: usize, label: BandLabel) -> Self {
        let mut d = Self::zeros(n_max);
        d.set(label, C64::new(1.0, 0.0));
        d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, label: BandLabel) -> C64 {
        if label.n > self.n_max {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[label.index()]
    }

    pub fn set(&mut self, label: BandLabel, value: C64) {
        self.coeffs[label.index()] = value;
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (BandLabel, C64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (BandLabel::from_index(i), c))
    }

    /// `Σ |a_{n,σ}|²`.
    pub fn weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_σ |a_{n,σ}|²` for each `n`.
    pub fn photon_weights(&self) -> Vec<f64> {
        self.coeffs.chunks(2).map(|p| p[0].norm_sqr() + p[1].norm_sqr()).collect()
    }

    /// Human-readable note when the decomposition missed part of the state.
    pub fn warning(&self) -> Option<String> {
        (self.residual > DECOMPOSITION_RESIDUAL_WARN).then(|| {
            format!(
                "band decomposition up to n = {} leaves residual norm {:e}",
                self.n_max, self.residual
            )
        })
    }

    /// JSON list of `{"n", "sigma", "re", "im"}` sorted by `n` then `sigma`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<CoefficientRecord> = self
            .iter()
            .map(|(l, c)| CoefficientRecord {
                n: l.n,
                sigma: l.sigma.as_i32(),
                re: c.re,
                im: c.im,
            })
            .collect();
        serde_json::to_value(rows).expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let rows: Vec<CoefficientRecord> = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        let n_max = rows.iter().map(|r| r.n).max().ok_or("empty decomposition")?;
        let mut d = Self::zeros(n_max);
        for r in rows {
            let sigma = Sign::from_i32(r.sigma).ok_or_else(|| format!("invalid sigma {}", r.sigma))?;
            d.set(BandLabel::new(r.n, sigma), C64::new(r.re, r.im));
        }
        Ok(d)
    }
}

/// `E_n = nω − g²/ω`, doubly degenerate in `λ = ±1`.
pub fn free_energy(n: usize, params: &ModelParams) -> f64 {
    n as f64 * params.omega - params.g * params.g / params.omega
}

/// Half the splitting of photon level `n`: `(Δ/2) e^{−θ²/2} L_n(θ²)`.
pub fn band_half_splitting(n: usize, params: &ModelParams) -> Result<f64, FockError> {
    let overlap = fock::displaced_matrix_element(n as u64, n as u64, params.theta())?;
    Ok(0.5 * params.delta * overlap)
}

/// `E_{n,σ} = σ (Δ/2) e^{−θ²/2} L_n(θ²)`.
pub fn band_energy(label: BandLabel, params: &ModelParams) -> Result<f64, FockError> {
    Ok(label.sigma.value() * band_half_splitting(label.n, params)?)
}

/// Total energy of `|ψ_n;σ⟩` under `H_0 + H_0′`: `E_n + E_{n,σ}`.
pub fn dressed_energy(label: BandLabel, params: &ModelParams) -> Result<f64, FockError> {
    Ok(free_energy(label.n, params) + band_energy(label, params)?)
}

/// Smallest `n` with `Σ_{k > n} e^{−μ} μ^k / k! < tol`.
pub fn poisson_cutoff(mean: f64, tol: f64) -> usize {
    if mean == 0.0 {
        return 0;
    }
    // walk the pmf forward, then sum the tail backwards from far out
    let far = (mean + 40.0 * mean.sqrt() + 60.0).ceil() as usize;
    let mut pmf = Vec::with_capacity(far + 1);
    let mut p = (-mean).exp();
    let mut ln_p = -mean;
    for k in 0..=far {
        if k > 0 {
            ln_p += mean.ln() - (k as f64).ln();
            p = ln_p.exp();
        }
        pmf.push(p);
    }
    let mut tail = 0.0;
    for n in (0..far).rev() {
        tail += pmf[n + 1];
        if tail >= tol {
            return n + 1;
        }
    }
    0
}

/// Band cutoff for the photon distribution of the initial state `|0⟩|g⟩`:
/// mean `g²/ω²` plus 8 standard deviations, extended where that
/// does not yet push the tail below 1e−15.
pub fn default_band_cutoff(params: &ModelParams) -> usize {
    let mean = params.beta().powi(2);
    let by_sd = (mean + 8.0 * mean.sqrt()).ceil() as usize;
    by_sd.max(poisson_cutoff(mean, 1.0e-15))
}

/// Cached displaced-state bases for one parameter set and truncation.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    params: ModelParams,
    trunc: TruncationConfig,
    /// Columns `|[n; α_+]⟩ = D(−g/ω)|n⟩`.
    shift_plus: DMatrix<f64>,
    /// Columns `|[n; α_−]⟩ = D(+g/ω)|n⟩`.
    shift_minus: DMatrix<f64>,
}

impl DressedBasis {
    pub fn new(params: &ModelParams, trunc: TruncationConfig) -> Result<Self, FockError> {
        let beta = params.beta();
        let shift_plus = fock::checked_displacement_real(trunc, -beta)?;
        // D(β) = D(−β)ᵀ for the real orthogonal displacement
        let shift_minus = shift_plus.transpose();
        Ok(Self {
            params: *params,
            trunc,
            shift_plus,
            shift_minus,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn trunc(&self) -> TruncationConfig {
        self.trunc
    }

    /// Largest band index with a full guard.
    pub fn max_band(&self) -> usize {
        self.trunc.interior()
    }

    fn shift(&self, lambda: Sign) -> &DMatrix<f64> {
        match lambda {
            Sign::Plus => &self.shift_plus,
            Sign::Minus => &self.shift_minus,
        }
    }

    /// `|[n; α_λ]⟩`.
    pub fn displaced_state(&self, n: usize, lambda: Sign) -> Result<FockVector, FockError> {
        self.trunc.check_index(n)?;
        let d = self.shift(lambda);
        Ok(DVector::from_fn(self.trunc.fock_dim(), |k, _| C64::new(d[(k, n)], 0.0)))
    }

    /// `|ψ_n; σ⟩` in the σ_3 product basis.
    pub fn band_eigenstate(&self, label: BandLabel) -> Result<SpinFockVector, FockError> {
        let a = self.displaced_state(label.n, Sign::Plus)? * C64::new(label.sigma.value() * SQRT_HALF, 0.0);
        let b = self.displaced_state(label.n, Sign::Minus)? * C64::new(SQRT_HALF, 0.0);
        SpinFockVector::from_sigma1_components(self.trunc, &a, &b)
    }

    /// Photon amplitudes in the displaced basis, `⟨[n; α_λ]|φ⟩` for all `n`.
    fn to_displaced(&self, lambda: Sign, photon: &FockVector) -> FockVector {
        let d = self.shift(lambda);
        let dim = self.trunc.fock_dim();
        DVector::from_fn(dim, |n, _| {
            (0..dim).fold(C64::new(0.0, 0.0), |acc, k| acc + photon[k] * d[(k, n)])
        })
    }

    fn from_displaced(&self, lambda: Sign, coeffs: &FockVector) -> FockVector {
        let d = self.shift(lambda);
        let dim = self.trunc.fock_dim();
        DVector::from_fn(dim, |k, _| {
            (0..dim).fold(C64::new(0.0, 0.0), |acc, n| acc + coeffs[n] * d[(k, n)])
        })
    }

    /// `U_F(t)|ψ⟩`: phase `e^{−i E_n t}` on each `|[n; α_λ]⟩|λ⟩`.
    pub fn free_propagate(&self, state: &SpinFockVector, t: f64) -> Result<SpinFockVector, FockError> {
        if state.trunc() != self.trunc {
            return Err(FockError::Dimension {
                expected: self.trunc.dim(),
                got: state.trunc().dim(),
            });
        }
        let mut parts = [Sign::Plus, Sign::Minus].map(|lambda| {
            let mut c = self.to_displaced(lambda, &state.sigma1_component(lambda));
            for (n, v) in c.iter_mut().enumerate() {
                *v *= C64::from_polar(1.0, -free_energy(n, &self.params) * t);
            }
            self.from_displaced(lambda, &c)
        });
        let [plus, minus] = std::mem::take(&mut parts);
        SpinFockVector::from_sigma1_components(self.trunc, &plus, &minus)
    }

    /// `a_{n,σ} = ⟨ψ_n; σ|ψ⟩` for `n ≤ n_max`, with the residual norm of the
    /// part not captured.
    pub fn decompose(&self, state: &SpinFockVector, n_max: usize) -> Result<BandDecomposition, DressedError> {
        if !state.is_state() {
            return Err(DressedError::NotAState { norm: state.norm() });
        }
        self.trunc.check_index(n_max)?;
        let cp = self.to_displaced(Sign::Plus, &state.sigma1_component(Sign::Plus));
        let cm = self.to_displaced(Sign::Minus, &state.sigma1_component(Sign::Minus));
        let mut d = BandDecomposition::zeros(n_max);
        for n in 0..=n_max {
            for sigma in [Sign::Minus, Sign::Plus] {
                let v = (cp[n] * sigma.value() + cm[n]) * SQRT_HALF;
                d.set(BandLabel::new(n, sigma), v);
            }
        }
        let back = self.recompose(&d)?;
        d.residual = (state.amps() - back.amps()).norm();
        Ok(d)
    }

    /// `Σ a_{n,σ} |ψ_n; σ⟩`.
    pub fn recompose(&self, decomp: &BandDecomposition) -> Result<SpinFockVector, FockError> {
        self.trunc.check_index(decomp.n_max())?;
        let dim = self.trunc.fock_dim();
        let mut p = DVector::zeros(dim);
        let mut q = DVector::zeros(dim);
        for n in 0..=decomp.n_max() {
            let plus = decomp.get(BandLabel::new(n, Sign::Plus));
            let minus = decomp.get(BandLabel::new(n, Sign::Minus));
            p[n] = (plus - minus) * SQRT_HALF;
            q[n] = (plus + minus) * SQRT_HALF;
        }
        let phi_plus = self.from_displaced(Sign::Plus, &p);
        let phi_minus = self.from_displaced(Sign::Minus, &q);
        SpinFockVector::from_sigma1_components(self.trunc, &phi_plus, &phi_minus)
    }
}

/// `|ψ_n; σ⟩` for one label.
pub fn band_eigenstate(
    label: BandLabel,
    params: &ModelParams,
    trunc: TruncationConfig,
) -> Result<SpinFockVector, FockError> {
    DressedBasis::new(params, trunc)?.band_eigenstate(label)
}

/// `U_F(t)|ψ⟩` on the state's own truncation.
pub fn u_free_propagate(state: &SpinFockVector, t: f64, params: &ModelParams) -> Result<SpinFockVector, FockError> {
    DressedBasis::new(params, state.trunc())?.free_propagate(state, t)
}

/// Band coefficients of an arbitrary normalized state.
pub fn decompose(
    state: &SpinFockVector,
    params: &ModelParams,
    n_max: usize,
) -> Result<BandDecomposition, DressedError> {
    DressedBasis::new(params, state.trunc())?.decompose(state, n_max)
}

/// Closed-form band coefficients of `|0⟩|g⟩`:
///
/// ```text
/// a_{n,σ}(0) = e^{−β²/2} β^n / (2√n!) · [σ − (−1)^n],    β = g/ω
/// ```
///
/// With `|±⟩ = (|e⟩ ± |g⟩)/√2` only `σ = −(−1)^n` survives, and the weight
/// carried by photon level `n` is the Poisson law `e^{−β²} β^{2n}/n!`.
pub fn initial_amplitudes(params: &ModelParams, n_max: usize) -> Result<BandDecomposition, DressedError> {
    let beta = params.beta();
    let mean = beta * beta;
    let tail = poisson_tail(mean, n_max);
    if tail > INITIAL_TAIL_TOL {
        return Err(DressedError::TailTooHeavy {
            tail,
            n_max,
            required: poisson_cutoff(mean, INITIAL_TAIL_TOL),
        });
    }
    let mut d = BandDecomposition::zeros(n_max);
    for n in 0..=n_max {
        let mag = if beta == 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-0.5 * mean + n as f64 * beta.ln() - 0.5 * crate::specfun::log_factorial(n as u64)).exp()
        };
        let sigma = -Sign::parity(n as u64);
        // [σ − (−1)^n]/2 = σ for the surviving branch
        d.set(BandLabel::new(n, sigma), C64::new(sigma.value() * mag, 0.0));
    }
    d.residual = tail.sqrt();
    Ok(d)
}

/// `Σ_{k > n_max} e^{−μ} μ^k / k!`.
fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut ln_p = -mean + (n_max + 1) as f64 * mean.ln() - crate::specfun::log_factorial(n_max as u64 + 1);
    let mut tail = 0.0;
    let mut k = n_max + 1;
    loop {
        let p = ln_p.exp();
        tail += p;
        if p < 1e-18 * tail.max(1e-300) && k as f64 > mean {
            break;
        }
        k += 1;
        ln_p += mean.ln() - (k as f64).ln();
        if k > n_max + 100_000 {
            break;
        }
    }
    tail
}
