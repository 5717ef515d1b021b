//! Explicit Runge–Kutta integrators for complex linear systems `y' = f(t, y)`.
//!
//! Both schemes land exactly on every requested sample time, so observables
//! are recorded from the integrator's own states rather than interpolated.

use serde::{Deserialize, Serialize};

use super::{DynamicsError, TimeGrid};
use crate::fock::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Classical fourth-order method with a fixed step `max_step`
    /// (shortened so that each sample interval holds a whole number of steps).
    Rk4,
    /// Dormand–Prince 5(4) with step-size control.
    DormandPrince45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            scheme: Scheme::DormandPrince45,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        Self {
            max_step: step,
            scheme: Scheme::Rk4,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: self.abs_tol.min(rel_tol * 1e-2),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if self.scheme == Scheme::DormandPrince45 && self.rel_tol < MIN_REL_TOL {
            return Err(DynamicsError::InvalidConfig(format!(
                "rel_tol {} is below what double precision can deliver ({MIN_REL_TOL:e})",
                self.rel_tol
            )));
        }
        if ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step) {
            Ok(())
        } else {
            Err(DynamicsError::InvalidConfig(format!(
                "tolerances and max_step must be positive: rel_tol {}, abs_tol {}, max_step {}",
                self.rel_tol, self.abs_tol, self.max_step
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Tighter tolerances only shrink steps until round-off dominates the error estimate.
pub const MIN_REL_TOL: f64 = 1e-14;

const MAX_STEPS: usize = 50_000_000;

/// Integrates from `grid.t_start`, calling `observe(k, t_k, y)` at every sample
/// (including the initial one). `observe` may abort by returning an error.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: &[C64],
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
    mut observe: O,
) -> Result<IntegrationStats, DynamicsError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<(), DynamicsError>,
{
    cfg.validate()?;
    let mut y = y0.to_vec();
    observe(0, grid.t_start, &y)?;
    let mut stats = IntegrationStats::default();
    match cfg.scheme {
        Scheme::Rk4 => {
            let mut work = Rk4Work::new(y.len());
            for k in 1..grid.samples {
                let (a, b) = (grid.time(k - 1), grid.time(k));
                let steps = ((b - a) / cfg.max_step).ceil().max(1.0) as usize;
                let h = (b - a) / steps as f64;
                for s in 0..steps {
                    rk4_step(&mut rhs, a + s as f64 * h, h, &mut y, &mut work);
                    stats.accepted += 1;
                    stats.evaluations += 4;
                }
                observe(k, b, &y)?;
            }
        }
        Scheme::DormandPrince45 => {
            let mut dp = Dopri::new(y.len());
            let mut t = grid.t_start;
            rhs(t, &y, &mut dp.k[0]);
            stats.evaluations += 1;
            let mut h = initial_step(&y, &dp.k[0], cfg).min(cfg.max_step);
            for k in 1..grid.samples {
                let target = grid.time(k);
                while t < target {
                    if stats.accepted + stats.rejected > MAX_STEPS {
                        return Err(DynamicsError::StepFailure { t, h, reason: "step budget exhausted" });
                    }
                    let remaining = target - t;
                    // land on the sample; a whisker of a final step is merged into this one
                    let clipped = h >= remaining * (1.0 - 1e-12) || remaining - h < 1e-3 * h;
                    let step = if clipped { remaining } else { h };
                    let err = dp.attempt(&mut rhs, t, step, &y, cfg);
                    stats.evaluations += 6;
                    if !err.is_finite() {
                        return Err(DynamicsError::StepFailure { t, h: step, reason: "non-finite derivative" });
                    }
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if err <= 1.0 {
                        if clipped {
                            t = target;
                        } else {
                            t += step;
                        }
                        dp.accept(&mut y);
                        stats.accepted += 1;
                        // a shortened landing step says nothing about the natural step size
                        if !clipped || factor < 1.0 {
                            h = (step * factor).min(cfg.max_step);
                        }
                    } else {
                        stats.rejected += 1;
                        h = step * factor.min(1.0);
                        if h < 1e-14 * t.abs().max(1.0) {
                            return Err(DynamicsError::StepFailure { t, h, reason: "step size underflow" });
                        }
                    }
                }
                observe(k, target, &y)?;
            }
        }
    }
    Ok(stats)
}

struct Rk4Work {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

fn rk4_step<F: FnMut(f64, &[C64], &mut [C64])>(rhs: &mut F, t: f64, h: f64, y: &mut [C64], w: &mut Rk4Work) {
    rhs(t, y, &mut w.k1);
    axpy_into(&mut w.tmp, y, 0.5 * h, &w.k1);
    rhs(t + 0.5 * h, &w.tmp, &mut w.k2);
    axpy_into(&mut w.tmp, y, 0.5 * h, &w.k2);
    rhs(t + 0.5 * h, &w.tmp, &mut w.k3);
    axpy_into(&mut w.tmp, y, h, &w.k3);
    rhs(t + h, &w.tmp, &mut w.k4);
    for i in 0..y.len() {
        y[i] += (w.k1[i] + (w.k2[i] + w.k3[i]) * 2.0 + w.k4[i]) * (h / 6.0);
    }
}

fn axpy_into(out: &mut [C64], y: &[C64], a: f64, x: &[C64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + xi * a;
    }
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Dopri {
    /// Stages; `k[0]` holds f(t, y) on entry (FSAL), `k[6]` f(t + h, y_new).
    k: [Vec<C64>; 7],
    y_new: Vec<C64>,
    tmp: Vec<C64>,
}

impl Dopri {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k: std::array::from_fn(|_| z.clone()),
            y_new: z.clone(),
            tmp: z,
        }
    }

    /// Computes a trial step and returns its scaled error norm.
    fn attempt<F: FnMut(f64, &[C64], &mut [C64])>(
        &mut self,
        rhs: &mut F,
        t: f64,
        h: f64,
        y: &[C64],
        cfg: &IntegratorConfig,
    ) -> f64 {
        let n = y.len();
        let stage = |tmp: &mut Vec<C64>, k: &[Vec<C64>; 7], coeffs: &[f64]| {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (j, c) in coeffs.iter().enumerate() {
                    acc += k[j][i] * *c;
                }
                tmp[i] = y[i] + acc * h;
            }
        };
        stage(&mut self.tmp, &self.k, &[A21]);
        rhs(t + C2 * h, &self.tmp, &mut self.k[1]);
        stage(&mut self.tmp, &self.k, &[A31, A32]);
        rhs(t + C3 * h, &self.tmp, &mut self.k[2]);
        stage(&mut self.tmp, &self.k, &[A41, A42, A43]);
        rhs(t + C4 * h, &self.tmp, &mut self.k[3]);
        stage(&mut self.tmp, &self.k, &[A51, A52, A53, A54]);
        rhs(t + C5 * h, &self.tmp, &mut self.k[4]);
        stage(&mut self.tmp, &self.k, &[A61, A62, A63, A64, A65]);
        rhs(t + h, &self.tmp, &mut self.k[5]);
        for i in 0..n {
            let k = &self.k;
            self.y_new[i] = y[i] + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
        }
        rhs(t + h, &self.y_new, &mut self.k[6]);
        let mut sum = 0.0;
        for i in 0..n {
            let k = &self.k;
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(self.y_new[i].norm());
            sum += (e.norm() / scale).powi(2);
        }
        (sum / n as f64).sqrt()
    }

    fn accept(&mut self, y: &mut [C64]) {
        y.copy_from_slice(&self.y_new);
        self.k.swap(0, 6);
    }
}

/// Standard starting-step heuristic from the size of `y` and `y'`.
fn initial_step(y: &[C64], dy: &[C64], cfg: &IntegratorConfig) -> f64 {
    let n = y.len() as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for (a, b) in y.iter().zip(dy) {
        let scale = cfg.abs_tol + cfg.rel_tol * a.norm();
        d0 += (a.norm() / scale).powi(2);
        d1 += (b.norm() / scale).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y' = −i ν y, exact solution e^{−iνt}.
    fn phase_rhs(nu: f64) -> impl FnMut(f64, &[C64], &mut [C64]) {
        move |_, y, dy| dy[0] = y[0] * C64::new(0.0, -nu)
    }

    #[test]
    fn dopri_hits_samples_and_tolerance() {
        let grid = TimeGrid::new(0.0, 20.0, 41).unwrap();
        let cfg = IntegratorConfig::default();
        let mut worst = 0.0f64;
        let mut seen = Vec::new();
        integrate(phase_rhs(1.3), &[C64::new(1.0, 0.0)], &grid, &cfg, |k, t, y| {
            seen.push((k, t));
            worst = worst.max((y[0] - C64::from_polar(1.0, -1.3 * t)).norm());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 41);
        assert_eq!(seen[40].1, 20.0);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let grid = TimeGrid::new(0.0, 5.0, 2).unwrap();
        let err = |h: f64| {
            let mut out = C64::new(0.0, 0.0);
            integrate(phase_rhs(2.0), &[C64::new(1.0, 0.0)], &grid, &IntegratorConfig::rk4(h), |_, _, y| {
                out = y[0];
                Ok(())
            })
            .unwrap();
            (out - C64::from_polar(1.0, -10.0)).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn observer_can_abort() {
        let grid = TimeGrid::new(0.0, 1.0, 5).unwrap();
        let r = integrate(phase_rhs(1.0), &[C64::new(1.0, 0.0)], &grid, &IntegratorConfig::default(), |k, _, _| {
            if k == 2 {
                Err(DynamicsError::InvalidConfig("stop".into()))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = IntegratorConfig {
            rel_tol: 0.0,
            ..IntegratorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
