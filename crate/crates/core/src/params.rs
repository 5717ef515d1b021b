use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid model parameter {name} = {value}: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

/// Physical parameters of `H = ω a†a + (Δ/2) σ_3 + g σ_1 (a† + a)` with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mode frequency ω.
    pub omega: f64,
    /// Level splitting Δ.
    pub delta: f64,
    /// Atom-field coupling g.
    pub g: f64,
}

impl ModelParams {
    pub fn new(omega: f64, delta: f64, g: f64) -> Result<Self, ParamError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ParamError {
                name: "omega",
                value: omega,
                reason: "must be finite and > 0",
            });
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(ParamError {
                name: "delta",
                value: delta,
                reason: "must be finite and >= 0",
            });
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(ParamError {
                name: "g",
                value: g,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { omega, delta, g })
    }

    /// Dimensionless displacement of the free problem, `g/ω`.
    pub fn beta(&self) -> f64 {
        self.g / self.omega
    }

    /// `θ = 2g/ω`, the displacement separating the two σ_1 branches.
    pub fn theta(&self) -> f64 {
        2.0 * self.g / self.omega
    }

    /// True in the regime `g ≥ Δ`, where the coupling dominates the level splitting.
    pub fn is_strong_coupling(&self) -> bool {
        self.g >= self.delta
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }
}

/// Sign label `±1` (a σ_1 eigenvalue or a band index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i32(v: i32) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// `(-1)^n` as a sign.
    pub fn parity(n: u64) -> Self {
        if n % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_i32())
    }
}
