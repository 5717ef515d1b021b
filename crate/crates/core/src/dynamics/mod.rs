//! Time evolution.
//!
//! Two independent routes are provided. [`propagate_full`] integrates the
//! Schrödinger equation of `H = ω a†a + (Δ/2)σ_3 + g σ_1 (a† + a)` on the
//! truncated product space. [`propagate_amplitudes`] integrates the
//! equations for the dressed-band amplitudes `a_{n,σ}(t)` defined by
//!
//! ```text
//! |ψ(t)⟩ = U_F(t) Σ e^{−i E_{n,σ} t} a_{n,σ}(t) |ψ_n; σ⟩
//! ```
//!
//! which read `i ȧ_k = Σ_j V_kj e^{i(Ω_k − Ω_j)t} a_j` with `Ω = E_{n,σ} + nω`
//! and `V` the off-band part of `(Δ/2)σ_3`. The two must agree; that is the
//! main end-to-end check of the band construction.

mod integrate;
mod series;
mod spectral;

pub use integrate::{integrate, IntegrationStats, IntegratorConfig, Scheme};
pub use series::{TimeGrid, TimeSeries, Track};
pub use spectral::{dominant_frequency, extract_oscillation_frequency, FrequencyEstimate};

use thiserror::Error;

use crate::dressed::{band_energy, BandDecomposition, BandLabel, DressedBasis, DressedError};
use crate::fock::{self, FockError, OperatorMatrix, SparseOperator, Spin, SpinFockVector, TruncationConfig, C64};
use crate::params::{ModelParams, Sign};

/// Norm drift at which a propagation is abandoned.
pub const NORM_DRIFT_FAIL: f64 = 1.0e-6;
/// Default ceiling on the population of the truncation edge.
pub const GUARD_LEAKAGE_FAIL: f64 = 1.0e-10;
/// Couplings below this fraction of Δ are dropped from the amplitude equations.
pub const COUPLING_CUTOFF: f64 = 1.0e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("norm drifted by {drift:e} at t = {t}; {hint}")]
    NormDrift { t: f64, drift: f64, hint: &'static str },
    #[error(
        "population {weight:e} reached the truncation edge (guard {guard}) at t = {t}; increase \
         n_max (current {n_max})"
    )]
    Leakage { t: f64, weight: f64, guard: usize, n_max: usize },
    #[error("integrator failed at t = {t} (step {h:e}): {reason}")]
    StepFailure { t: f64, h: f64, reason: &'static str },
    #[error("no dominant oscillation: {0}")]
    NoDominantPeak(String),
    #[error("initial state is not normalized (norm {norm})")]
    NotAState { norm: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Dressed(#[from] DressedError),
}

impl DynamicsError {
    /// True for failures of the numerics (truncation, step control, drift)
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            DynamicsError::NormDrift { .. }
            | DynamicsError::Leakage { .. }
            | DynamicsError::StepFailure { .. }
            | DynamicsError::NoDominantPeak(_) => true,
            DynamicsError::Fock(FockError::Leakage { .. }) => true,
            DynamicsError::Dressed(DressedError::TailTooHeavy { .. }) => true,
            DynamicsError::Dressed(DressedError::Fock(FockError::Leakage { .. })) => true,
            _ => false,
        }
    }
}

fn hamiltonian_triplets(params: &ModelParams, trunc: TruncationConfig) -> Vec<(usize, usize, C64)> {
    let idx = SpinFockVector::index;
    let mut t = Vec::with_capacity(4 * trunc.dim());
    for n in 0..=trunc.n_max {
        let photon = n as f64 * params.omega;
        t.push((idx(n, Spin::Excited), idx(n, Spin::Excited), C64::new(photon + 0.5 * params.delta, 0.0)));
        t.push((idx(n, Spin::Ground), idx(n, Spin::Ground), C64::new(photon - 0.5 * params.delta, 0.0)));
        if n < trunc.n_max && params.g != 0.0 {
            // g σ_1 (a + a†): ⟨n+1, s̄|·|n, s⟩ = g √(n+1)
            let c = C64::new(params.g * ((n + 1) as f64).sqrt(), 0.0);
            for (s, flip) in [(Spin::Excited, Spin::Ground), (Spin::Ground, Spin::Excited)] {
                t.push((idx(n + 1, flip), idx(n, s), c));
                t.push((idx(n, s), idx(n + 1, flip), c));
            }
        }
    }
    t
}

/// Dense `H` in the interleaved (Fock × σ_3) basis.
pub fn build_hamiltonian(params: &ModelParams, trunc: TruncationConfig) -> OperatorMatrix {
    sparse_hamiltonian(params, trunc).to_dense()
}

pub fn sparse_hamiltonian(params: &ModelParams, trunc: TruncationConfig) -> SparseOperator {
    SparseOperator::from_triplets(trunc.dim(), hamiltonian_triplets(params, trunc))
}

/// Integrates `i ψ' = H ψ` for an arbitrary (Hermitian) `H`, reporting each
/// sample to `observe`.
pub fn evolve<O>(
    h: &SparseOperator,
    state0: &SpinFockVector,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
    mut observe: O,
) -> Result<IntegrationStats, DynamicsError>
where
    O: FnMut(usize, f64, &SpinFockVector) -> Result<(), DynamicsError>,
{
    let trunc = state0.trunc();
    if h.dim() != trunc.dim() {
        return Err(FockError::Dimension {
            expected: trunc.dim(),
            got: h.dim(),
        }
        .into());
    }
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        h.apply_into(y, dy);
        for v in dy.iter_mut() {
            *v = C64::new(v.im, -v.re);
        }
    };
    integrate(rhs, state0.amps().as_slice(), grid, cfg, |k, t, y| {
        let v = SpinFockVector::from_amps(trunc, nalgebra::DVector::from_column_slice(y))?;
        observe(k, t, &v)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub pop_g: f64,
    pub pop_e: f64,
}

/// `|⟨g|ψ⟩|²` and `|⟨e|ψ⟩|²` summed over photon number, normalized by `‖ψ‖²`.
pub fn populations(state: &SpinFockVector) -> Populations {
    let norm2 = state.norm().powi(2);
    Populations {
        pop_g: state.spin_population(Spin::Ground) / norm2,
        pop_e: state.spin_population(Spin::Excited) / norm2,
    }
}

/// Population of the upper half of the guard levels, where the truncation
/// starts to distort the dynamics. The lower half is allowed to fill: that
/// is where displaced states spread by design.
pub fn edge_weight(state: &SpinFockVector) -> f64 {
    let trunc = state.trunc();
    let levels = trunc.guard.div_ceil(2).max(1);
    (trunc.n_max + 1 - levels.min(trunc.n_max + 1)..=trunc.n_max)
        .map(|n| state.get(n, Spin::Excited).norm_sqr() + state.get(n, Spin::Ground).norm_sqr())
        .sum()
}

/// `|a_{n,σ}|²` for every label.
pub fn band_populations(decomp: &BandDecomposition) -> Vec<(BandLabel, f64)> {
    decomp.iter().map(|(l, c)| (l, c.norm_sqr())).collect()
}

#[derive(Debug, Clone, Default)]
pub struct FullOptions {
    /// Bands whose populations `|⟨ψ_n;σ|ψ(t)⟩|²` are recorded.
    pub bands: Vec<BandLabel>,
    pub keep_states: bool,
    /// Edge population (see [`edge_weight`]) that aborts the run; `None` uses [`GUARD_LEAKAGE_FAIL`].
    pub leakage_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FullRun {
    /// Tracks `pop_g`, `pop_e`, `norm`, `energy`, then one per requested band.
    pub series: TimeSeries,
    pub states: Vec<SpinFockVector>,
    pub stats: IntegrationStats,
    pub max_norm_drift: f64,
    pub max_edge_weight: f64,
}

/// Exact evolution under the full Hamiltonian.
///
/// The state is never renormalized: `|‖ψ‖ − 1|` is the error signal and a
/// drift above [`NORM_DRIFT_FAIL`] aborts the run, as does population
/// reaching the truncation guard.
pub fn propagate_full(
    state0: &SpinFockVector,
    grid: &TimeGrid,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    opts: &FullOptions,
) -> Result<FullRun, DynamicsError> {
    if !state0.is_state() {
        return Err(DynamicsError::NotAState { norm: state0.norm() });
    }
    let trunc = state0.trunc();
    let h = sparse_hamiltonian(params, trunc);
    let band_states = if opts.bands.is_empty() {
        Vec::new()
    } else {
        let basis = DressedBasis::new(params, trunc)?;
        opts.bands
            .iter()
            .map(|&l| basis.band_eigenstate(l))
            .collect::<Result<Vec<_>, _>>()?
    };
    let leakage_tol = opts.leakage_tol.unwrap_or(GUARD_LEAKAGE_FAIL);

    let samples = grid.samples;
    let mut pop_g = Vec::with_capacity(samples);
    let mut pop_e = Vec::with_capacity(samples);
    let mut norm = Vec::with_capacity(samples);
    let mut energy = Vec::with_capacity(samples);
    let mut bands: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); band_states.len()];
    let mut states = Vec::new();
    let mut max_drift = 0.0f64;
    let mut max_edge = 0.0f64;

    let stats = evolve(&h, state0, grid, cfg, |_, t, psi| {
        let nrm = psi.norm();
        let drift = (nrm - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_DRIFT_FAIL {
            return Err(DynamicsError::NormDrift {
                t,
                drift,
                hint: "tighten rel_tol or reduce max_step",
            });
        }
        let guard = edge_weight(psi);
        max_edge = max_edge.max(guard);
        if guard > leakage_tol {
            return Err(DynamicsError::Leakage {
                t,
                weight: guard,
                guard: trunc.guard,
                n_max: trunc.n_max,
            });
        }
        let p = populations(psi);
        pop_g.push(p.pop_g);
        pop_e.push(p.pop_e);
        norm.push(nrm);
        energy.push(h.expectation(psi.amps().as_slice()).re / (nrm * nrm));
        for (track, b) in bands.iter_mut().zip(&band_states) {
            track.push(b.fidelity(psi));
        }
        if opts.keep_states {
            states.push(psi.clone());
        }
        Ok(())
    })?;

    let mut series = TimeSeries::new(*grid);
    series.push_real("pop_g", pop_g);
    series.push_real("pop_e", pop_e);
    series.push_real("norm", norm);
    series.push_real("energy", energy);
    for (l, track) in opts.bands.iter().zip(bands) {
        series.push_real(&l.track_name(), track);
    }
    Ok(FullRun {
        series,
        states,
        stats,
        max_norm_drift: max_drift,
        max_edge_weight: max_edge,
    })
}

/// The banded coupling system of the amplitude equations.
#[derive(Debug, Clone)]
pub struct AmplitudeSystem {
    n_max: usize,
    /// `Ω_k = E_{n,σ} + nω` per band index.
    pub frequencies: Vec<f64>,
    /// Row `k`: `(j, V_kj)` for the retained couplings.
    rows: Vec<Vec<(usize, f64)>>,
    /// Largest photon-number difference kept.
    pub diff_cut: usize,
    /// Largest dropped coupling magnitude.
    pub max_omitted: f64,
}

impl AmplitudeSystem {
    pub fn new(params: &ModelParams, n_max: usize) -> Result<Self, DynamicsError> {
        let dim = 2 * (n_max + 1);
        let theta = params.theta();
        // D_mn(θ) for m ≥ n, evaluated once
        let mut overlap = vec![vec![0.0; n_max + 1]; n_max + 1];
        for m in 0..=n_max {
            for n in 0..=m {
                overlap[m][n] = fock::displaced_matrix_element(m as u64, n as u64, theta)?;
            }
        }
        let coupling = |k: BandLabel, j: BandLabel| -> f64 {
            // ⟨ψ_k|(Δ/2)σ_3|ψ_j⟩ = (Δ/4) D_{n_k n_j} [σ_k + σ_j (−1)^{n_k − n_j}]
            let (m, n) = (k.n, j.n);
            let d = if m >= n {
                overlap[m][n]
            } else {
                Sign::parity((n - m) as u64).value() * overlap[n][m]
            };
            let parity = Sign::parity(m.abs_diff(n) as u64).value();
            0.25 * params.delta * d * (k.sigma.value() + j.sigma.value() * parity)
        };

        let threshold = COUPLING_CUTOFF * params.delta;
        let mut by_diff = vec![0.0f64; n_max + 1];
        for k in 0..dim {
            for j in 0..dim {
                let (lk, lj) = (BandLabel::from_index(k), BandLabel::from_index(j));
                if lk.n != lj.n {
                    let d = lk.n.abs_diff(lj.n);
                    by_diff[d] = by_diff[d].max(coupling(lk, lj).abs());
                }
            }
        }
        let diff_cut = (1..=n_max).rev().find(|&d| by_diff[d] >= threshold).unwrap_or(0);
        let max_omitted = by_diff.iter().skip(diff_cut + 1).copied().fold(0.0, f64::max);

        let mut rows = vec![Vec::new(); dim];
        for (k, row) in rows.iter_mut().enumerate() {
            let lk = BandLabel::from_index(k);
            for j in 0..dim {
                let lj = BandLabel::from_index(j);
                if lk.n == lj.n || lk.n.abs_diff(lj.n) > diff_cut {
                    continue;
                }
                let v = coupling(lk, lj);
                if v != 0.0 {
                    row.push((j, v));
                }
            }
        }
        let frequencies = (0..dim)
            .map(|k| {
                let l = BandLabel::from_index(k);
                Ok(band_energy(l, params)? + l.n as f64 * params.omega)
            })
            .collect::<Result<Vec<_>, FockError>>()?;
        Ok(Self {
            n_max,
            frequencies,
            rows,
            diff_cut,
            max_omitted,
        })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coupling(&self, k: usize, j: usize) -> f64 {
        self.rows[k].iter().find(|(i, _)| *i == j).map_or(0.0, |(_, v)| *v)
    }

    /// Largest absolute row sum of `V`.
    pub fn max_row_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `ȧ = −i P V P* a` with `P = diag(e^{iΩt})`.
    fn rhs(&self, t: f64, a: &[C64], da: &mut [C64], phase: &mut [C64], q: &mut [C64]) {
        for k in 0..a.len() {
            phase[k] = C64::from_polar(1.0, self.frequencies[k] * t);
            q[k] = phase[k].conj() * a[k];
        }
        for (k, row) in self.rows.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for &(j, v) in row {
                s += q[j] * v;
            }
            let ps = phase[k] * s;
            da[k] = C64::new(ps.im, -ps.re);
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AmplitudeOptions {
    /// Bands whose populations `|a_{n,σ}|²` are recorded.
    pub bands: Vec<BandLabel>,
    pub keep_snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct AmplitudeRun {
    /// Tracks `norm`, then one per requested band.
    pub series: TimeSeries,
    pub snapshots: Vec<BandDecomposition>,
    pub stats: IntegrationStats,
    pub max_norm_drift: f64,
    pub diff_cut: usize,
    pub max_omitted: f64,
}

/// Integrates the band-amplitude equations, no rotating-wave truncation:
/// every coupling above `COUPLING_CUTOFF · Δ` is kept.
pub fn propagate_amplitudes(
    decomp0: &BandDecomposition,
    grid: &TimeGrid,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    opts: &AmplitudeOptions,
) -> Result<AmplitudeRun, DynamicsError> {
    let w0 = decomp0.weight();
    if (w0.sqrt() - 1.0).abs() > NORM_DRIFT_FAIL {
        return Err(DynamicsError::NotAState { norm: w0.sqrt() });
    }
    let system = AmplitudeSystem::new(params, decomp0.n_max())?;
    let dim = system.dim();
    let mut phase = vec![C64::new(0.0, 0.0); dim];
    let mut q = vec![C64::new(0.0, 0.0); dim];
    let rhs = |t: f64, a: &[C64], da: &mut [C64]| system.rhs(t, a, da, &mut phase, &mut q);

    let mut norm = Vec::with_capacity(grid.samples);
    let mut bands: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.samples); opts.bands.len()];
    let mut snapshots = Vec::new();
    let mut max_drift = 0.0f64;
    let n_max = decomp0.n_max();
    let stats = integrate(rhs, decomp0.coeffs(), grid, cfg, |_, t, a| {
        let nrm = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let drift = (nrm - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_DRIFT_FAIL {
            return Err(DynamicsError::NormDrift {
                t,
                drift,
                hint: "tighten rel_tol or reduce max_step",
            });
        }
        norm.push(nrm);
        for (track, l) in bands.iter_mut().zip(&opts.bands) {
            track.push(if l.n <= n_max { a[l.index()].norm_sqr() } else { 0.0 });
        }
        if opts.keep_snapshots {
            snapshots.push(BandDecomposition::from_coeffs(n_max, a.to_vec()));
        }
        Ok(())
    })?;

    let mut series = TimeSeries::new(*grid);
    series.push_real("norm", norm);
    for (l, track) in opts.bands.iter().zip(bands) {
        series.push_real(&l.track_name(), track);
    }
    Ok(AmplitudeRun {
        series,
        snapshots,
        stats,
        max_norm_drift: max_drift,
        diff_cut: system.diff_cut,
        max_omitted: system.max_omitted,
    })
}

/// Lab-frame state `U_F(t) Σ e^{−i E_{n,σ} t} a_{n,σ} |ψ_n; σ⟩` built from
/// band amplitudes at time `t`.
pub fn amplitudes_to_state(
    basis: &DressedBasis,
    amplitudes: &BandDecomposition,
    t: f64,
) -> Result<SpinFockVector, DynamicsError> {
    let mut rotated = amplitudes.clone();
    for (l, c) in amplitudes.iter() {
        let e = band_energy(l, basis.params())?;
        rotated.set(l, c * C64::from_polar(1.0, -e * t));
    }
    let chi = basis.recompose(&rotated)?;
    Ok(basis.free_propagate(&chi, t)?)
}
