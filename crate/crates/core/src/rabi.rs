//! Resonant transitions between dressed bands.
//!
//! Two bands `(n, σ)` and `(m, σ′)` are coupled by the off-diagonal part of
//! `(Δ/2)σ_3`, whose matrix element in the band basis is
//! `(Δ/4) D_mn(θ) [σ′ + σ(−1)^{m−n}]`. The bracket vanishes unless the
//! transition is interband with odd `m − n` or intraband with even `m − n`.
//! When it does not vanish the two-level reduction oscillates at angular
//! frequency `R = Δ |D_mn(θ)|`, i.e.
//!
//! ```text
//! R = Δ √(n!/m!) θ^{m−n} e^{−θ²/2} |L_n^{(m−n)}(θ²)|,   m ≥ n,  θ = 2g/ω
//! ```
//!
//! which for large `n` at fixed `4√n g/ω` tends to `Δ |J_{m−n}(4√n g/ω)|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dressed::{band_energy, BandLabel};
use crate::fock::{self, FockError, C64};
use crate::params::{ModelParams, Sign};
use crate::specfun::{self, SpecFunError};

pub const CSV_HEADER: &str =
    "n,m,sigma_from,sigma_to,kind,diff,frequency,asymptotic,detuning,bessel_order,bessel_argument";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RabiError {
    #[error("transition {0} is parity-forbidden: {1}")]
    Forbidden(TransitionSpec, &'static str),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("no positive level splitting gives detuning/R = {ratio} for {spec}")]
    NoSplitting { spec: TransitionSpec, ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Intraband,
    Interband,
}

impl TransitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransitionKind::Interband => "interband",
            TransitionKind::Intraband => "intraband",
        }
    }

    /// The only kind allowed for a given photon-number difference.
    pub fn allowed_for(diff: i64) -> Self {
        if diff.rem_euclid(2) == 1 {
            TransitionKind::Interband
        } else {
            TransitionKind::Intraband
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub from: BandLabel,
    pub to: BandLabel,
}

impl TransitionSpec {
    pub fn new(from: BandLabel, to: BandLabel) -> Self {
        Self { from, to }
    }

    pub fn kind(&self) -> TransitionKind {
        if self.from.sigma == self.to.sigma {
            TransitionKind::Intraband
        } else {
            TransitionKind::Interband
        }
    }

    /// `m − n`.
    pub fn diff(&self) -> i64 {
        self.to.n as i64 - self.from.n as i64
    }

    pub fn allowed(&self) -> bool {
        self.kind() == TransitionKind::allowed_for(self.diff())
    }

    pub fn reversed(&self) -> Self {
        Self {
            from: self.to,
            to: self.from,
        }
    }

    fn require_allowed(&self) -> Result<(), RabiError> {
        if self.allowed() {
            Ok(())
        } else if self.kind() == TransitionKind::Interband {
            Err(RabiError::Forbidden(*self, "interband transitions need an odd photon-number difference"))
        } else {
            Err(RabiError::Forbidden(*self, "intraband transitions need an even photon-number difference"))
        }
    }
}

impl std::fmt::Display for TransitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiResult {
    pub spec: TransitionSpec,
    pub frequency: f64,
    pub detuning: f64,
    pub asymptotic: f64,
    pub bessel_order: u32,
    pub bessel_argument: f64,
}

impl RabiResult {
    /// `|detuning| / R`, infinite for a forbidden or uncoupled pair.
    pub fn detuning_ratio(&self) -> f64 {
        if self.frequency > 0.0 {
            self.detuning.abs() / self.frequency
        } else {
            f64::INFINITY
        }
    }

    /// `|R − asymptote| / asymptote`; NaN when the asymptote vanishes.
    pub fn relative_deviation(&self) -> f64 {
        if self.asymptotic > 0.0 {
            (self.frequency - self.asymptotic).abs() / self.asymptotic
        } else {
            f64::NAN
        }
    }

    /// One CSV row matching [`CSV_HEADER`]; energies divided by `unit`.
    pub fn csv_row(&self, unit: f64) -> String {
        use crate::output::fmt_f64;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.spec.from.n,
            self.spec.to.n,
            self.spec.from.sigma.as_i32(),
            self.spec.to.sigma.as_i32(),
            self.spec.kind().as_str(),
            self.spec.diff(),
            fmt_f64(self.frequency / unit),
            fmt_f64(self.asymptotic / unit),
            fmt_f64(self.detuning / unit),
            self.bessel_order,
            fmt_f64(self.bessel_argument),
        )
    }
}

/// Mismatch of total dressed energies, `(E_n + E_{n,σ}) − (E_m + E_{m,σ′})`.
///
/// Written out this is `E_{n,σ} − E_{m,σ′} + (n − m)ω`; the pair is resonant
/// when it vanishes, which is the stationary-phase condition of the
/// amplitude equations.
pub fn detuning(spec: &TransitionSpec, params: &ModelParams) -> Result<f64, FockError> {
    if spec.from == spec.to {
        return Ok(0.0);
    }
    Ok(band_energy(spec.from, params)? - band_energy(spec.to, params)?
        + (spec.from.n as f64 - spec.to.n as f64) * params.omega)
}

/// Signed band coupling `⟨ψ_m;σ′|(Δ/2)σ_3|ψ_n;σ⟩` for `n ≠ m`.
pub fn band_coupling(spec: &TransitionSpec, params: &ModelParams) -> Result<f64, FockError> {
    let (n, m) = (spec.from.n as u64, spec.to.n as u64);
    let parity = Sign::parity(m.abs_diff(n)).value();
    let bracket = spec.to.sigma.value() + spec.from.sigma.value() * parity;
    if bracket == 0.0 || params.delta == 0.0 {
        return Ok(0.0);
    }
    Ok(0.25 * params.delta * fock::displaced_matrix_element(m, n, params.theta())? * bracket)
}

/// Rabi angular frequency of the pair, exactly 0 when parity-forbidden.
pub fn rabi_frequency(spec: &TransitionSpec, params: &ModelParams) -> Result<RabiResult, RabiError> {
    let lo = spec.from.n.min(spec.to.n) as u64;
    let hi = spec.from.n.max(spec.to.n) as u64;
    let frequency = if spec.allowed() && params.delta > 0.0 {
        let overlap = fock::displaced_matrix_element(hi, lo, params.theta())?;
        params.delta * overlap.abs()
    } else {
        0.0
    };
    let order = u32::try_from(hi - lo).map_err(|_| SpecFunError::Domain {
        name: "bessel order",
        value: (hi - lo) as f64,
        limit: "order <= 10^4",
    })?;
    let argument = bessel_argument(lo, params);
    Ok(RabiResult {
        spec: *spec,
        frequency,
        detuning: detuning(spec, params)?,
        asymptotic: rabi_asymptotic(spec, params)?,
        bessel_order: order,
        bessel_argument: argument,
    })
}

fn bessel_argument(n: u64, params: &ModelParams) -> f64 {
    4.0 * (n as f64).sqrt() * params.beta()
}

/// `Δ |J_{|m−n|}(4√min(n,m) g/ω)|`, or 0 for a parity-forbidden pair.
pub fn rabi_asymptotic(spec: &TransitionSpec, params: &ModelParams) -> Result<f64, SpecFunError> {
    if !spec.allowed() {
        return Ok(0.0);
    }
    let lo = spec.from.n.min(spec.to.n) as u64;
    let order = spec.diff().unsigned_abs();
    let order = u32::try_from(order).unwrap_or(u32::MAX);
    Ok(params.delta * specfun::bessel_j(order, bessel_argument(lo, params))?.abs())
}

/// Two-level solution of the resonant pair at time `t`:
///
/// ```text
/// a_from(t) = a_from(0) cos(Rt/2) − i a_to(0) sin(Rt/2)
/// a_to(t)   = a_to(0)   cos(Rt/2) − i a_from(0) sin(Rt/2)
/// ```
pub fn rwa_pair_evolution(
    spec: &TransitionSpec,
    a_from_0: C64,
    a_to_0: C64,
    t: f64,
    params: &ModelParams,
) -> Result<(C64, C64), RabiError> {
    spec.require_allowed()?;
    let r = rabi_frequency(spec, params)?.frequency;
    Ok(rotate_pair(a_from_0, a_to_0, 0.5 * r * t))
}

fn rotate_pair(a: C64, b: C64, angle: f64) -> (C64, C64) {
    let (s, c) = angle.sin_cos();
    let mi = C64::new(0.0, -s);
    (a * c + b * mi, b * c + a * mi)
}

/// Level splitting `Δ` at which the pair has `detuning / R = ratio` for the
/// given `ω` and `g`. Both quantities are linear in `Δ` apart from the
/// photon term, so the solution is unique when it exists.
pub fn delta_for_detuning_ratio(
    spec: &TransitionSpec,
    omega: f64,
    g: f64,
    ratio: f64,
) -> Result<f64, RabiError> {
    spec.require_allowed()?;
    let unit = ModelParams::new(omega, 1.0, g).expect("caller passes valid omega and g");
    let slope = detuning(spec, &unit)? - (spec.from.n as f64 - spec.to.n as f64) * omega;
    let r_unit = rabi_frequency(spec, &unit)?.frequency;
    let denom = slope - ratio * r_unit;
    let delta = -(spec.from.n as f64 - spec.to.n as f64) * omega / denom;
    if delta.is_finite() && delta > 0.0 {
        Ok(delta)
    } else {
        Err(RabiError::NoSplitting { spec: *spec, ratio })
    }
}

/// All allowed transitions `(n, σ) → (n + d, σ′)` with `n` in `n_range` and
/// `0 ≤ d ≤ max_diff`. Negative differences are the same transitions seen
/// from the other end and are not listed twice.
///
/// For each `(n, d)` the kind is fixed by parity. Of the two sign
/// orientations of that kind the one closer to resonance is reported, with
/// `σ = +1` on ties.
pub fn transition_table(
    params: &ModelParams,
    n_range: std::ops::RangeInclusive<usize>,
    max_diff: usize,
) -> Result<Vec<RabiResult>, RabiError> {
    let pairs: Vec<(usize, usize)> = n_range.flat_map(|n| (0..=max_diff).map(move |d| (n, d))).collect();
    let mut rows = pairs
        .par_iter()
        .map(|&(n, d)| best_orientation(n, d, params))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| {
        (a.spec.from.n, a.spec.diff(), a.spec.kind()).cmp(&(b.spec.from.n, b.spec.diff(), b.spec.kind()))
    });
    Ok(rows)
}

/// The allowed transition from photon level `n` up by `d` that is closest to resonance.
pub fn best_orientation(n: usize, d: usize, params: &ModelParams) -> Result<RabiResult, RabiError> {
    let kind = TransitionKind::allowed_for(d as i64);
    let mut best: Option<RabiResult> = None;
    for sigma in [Sign::Plus, Sign::Minus] {
        let to_sigma = match kind {
            TransitionKind::Intraband => sigma,
            TransitionKind::Interband => -sigma,
        };
        let spec = TransitionSpec::new(BandLabel::new(n, sigma), BandLabel::new(n + d, to_sigma));
        let r = rabi_frequency(&spec, params)?;
        if best.is_none_or(|b| r.detuning.abs() < b.detuning.abs()) {
            best = Some(r);
        }
    }
    Ok(best.expect("two orientations evaluated"))
}
