use rustfft::FftPlanner;

use super::{DynamicsError, TimeSeries};
use crate::fock::C64;

/// Padding factor applied before the FFT.
const ZERO_PAD: usize = 8;
/// Minimum ratio of peak power to the median spectral power.
const PEAK_TO_FLOOR: f64 = 1.0e3;
const MIN_PERIODS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    /// Dominant angular frequency.
    pub omega: f64,
    /// Rayleigh resolution of the record, `2π / T`.
    pub resolution: f64,
    /// Spacing of the padded FFT grid.
    pub bin_width: f64,
    /// Number of periods of `omega` contained in the record.
    pub periods: f64,
    pub peak_to_floor: f64,
}

/// Dominant angular frequency of a real track.
///
/// The mean is removed and a Hann window applied; the peak of the
/// zero-padded FFT is located with a parabola through the log-power of the
/// three highest bins and then polished by a windowed single-tone fit
/// within one padded bin.
pub fn extract_oscillation_frequency(series: &TimeSeries, track: &str) -> Result<FrequencyEstimate, DynamicsError> {
    let values = series
        .real(track)
        .ok_or_else(|| DynamicsError::InvalidConfig(format!("no real track named {track:?}")))?;
    dominant_frequency(values, series.grid.spacing())
}

pub fn dominant_frequency(values: &[f64], dt: f64) -> Result<FrequencyEstimate, DynamicsError> {
    let n = values.len();
    if n < 8 {
        return Err(DynamicsError::NoDominantPeak(format!("only {n} samples")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if !(spread > 1e-12 * mean.abs().max(1.0)) {
        return Err(DynamicsError::NoDominantPeak(format!(
            "track is constant to within {spread:e}"
        )));
    }
    let window: Vec<f64> = (0..n)
        .map(|j| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64).cos())
        .collect();
    let centred: Vec<f64> = values.iter().zip(&window).map(|(v, w)| (v - mean) * w).collect();

    let len = (n * ZERO_PAD).next_power_of_two();
    let mut buf: Vec<C64> = centred.iter().map(|&v| C64::new(v, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf[..=len / 2].iter().map(|c| c.norm_sqr()).collect();

    let (k, &peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("spectrum has positive-frequency bins");
    let mut sorted = power[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    let peak_to_floor = if floor > 0.0 { peak / floor } else { f64::INFINITY };
    if peak_to_floor < PEAK_TO_FLOOR {
        return Err(DynamicsError::NoDominantPeak(format!(
            "peak/median power {peak_to_floor:.3e} is below {PEAK_TO_FLOOR:e}"
        )));
    }

    let bin_width = 2.0 * std::f64::consts::PI / (len as f64 * dt);
    let offset = if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1].ln(), power[k].ln(), power[k + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let coarse = (k as f64 + offset) * bin_width;
    let omega = polish(values, &window, dt, coarse - bin_width, coarse + bin_width);

    let span = dt * (n - 1) as f64;
    let periods = omega * span / (2.0 * std::f64::consts::PI);
    if periods < MIN_PERIODS {
        return Err(DynamicsError::NoDominantPeak(format!(
            "only {periods:.2} periods of the dominant frequency {omega} are captured"
        )));
    }
    Ok(FrequencyEstimate {
        omega,
        resolution: 2.0 * std::f64::consts::PI / span,
        bin_width,
        periods,
        peak_to_floor,
    })
}

/// Refines a frequency by weighted least squares: the model
/// `c + A cos νt + B sin νt` is fitted at each trial `ν` and the residual
/// minimized by golden-section search on `[lo, hi]`. Unlike the peak of a
/// one-sided transform this is unbiased for a pure tone.
fn polish(x: &[f64], w: &[f64], dt: f64, lo: f64, hi: f64) -> f64 {
    let explained = |nu: f64| {
        let mut g = nalgebra::Matrix3::<f64>::zeros();
        let mut b = nalgebra::Vector3::<f64>::zeros();
        for (j, (&v, &wj)) in x.iter().zip(w).enumerate() {
            let (s, c) = (nu * j as f64 * dt).sin_cos();
            let basis = nalgebra::Vector3::new(1.0, c, s);
            g += basis * basis.transpose() * wj;
            b += basis * (wj * v);
        }
        match g.cholesky() {
            Some(ch) => b.dot(&ch.solve(&b)),
            None => 0.0,
        }
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.max(0.0), hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (explained(c), explained(d));
    while (b - a) > 1e-12 * b.abs().max(1e-300) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = explained(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = explained(d);
        }
    }
    0.5 * (a + b)
}
