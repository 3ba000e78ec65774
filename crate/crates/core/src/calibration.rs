//! Feedback calibration of the shaping weights.
//!
//! Each iteration measures the impulse response of every channel on its
//! own, compares the measured amplitude with the target weight and applies a
//! damped ratio update to a per-channel gain. An optional delay trim pulls
//! each channel's measured delay back to `n ΔT`. The target tap set is never
//! modified; corrections live in [`ChannelCorrections`].

use serde::{Deserialize, Serialize};

use crate::engine::{simulate_channel, simulate_channels, ChannelCorrections, ProcessorSpec};
use crate::error::{Error, Result};
use crate::signal::{gaussian_pulse, Waveform};
use crate::taps::TapSet;

/// FWHM of the default probe pulse, seconds.
pub const PROBE_FWHM: f64 = 0.17e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Fraction μ of the measured error corrected per iteration.
    pub damping: f64,
    pub max_iter: usize,
    /// Stop once `max|e_n| / max|a_target|` drops below this.
    pub tol: f64,
    pub phase_correction: bool,
    /// Re-draw the comb noise for every measurement round.
    pub redraw_noise: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { damping: 0.5, max_iter: 30, tol: 1e-5, phase_correction: false, redraw_noise: false }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::param("damping", format!("must lie in (0, 1], got {}", self.damping)));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::param("tol", format!("must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    /// Measurement rounds performed.
    pub iterations_used: usize,
    /// Normalized residual measured at the start of every round.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Final per-channel gains.
    pub gains: Vec<f64>,
    /// Final per-channel delay trims, seconds.
    pub delays: Vec<f64>,
}

impl CalibrationReport {
    /// `iteration,residual` rows, iterations counted from 1.
    pub fn residual_csv(&self) -> String {
        let mut s = String::from("iteration,residual\n");
        for (i, r) in self.residuals.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, r));
        }
        s
    }
}

/// Signed peak amplitude and delay of one channel's impulse response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelMeasurement {
    /// Peak of the response divided by the probe peak.
    pub amplitude: f64,
    /// Response peak time minus probe peak time, seconds.
    pub delay: f64,
}

/// Gaussian probe on the standard grid, 1 ps steps over 8192 samples.
pub fn standard_probe() -> Waveform {
    gaussian_pulse(PROBE_FWHM, 0.0, 1e-12, 8192).expect("standard probe parameters are valid")
}

/// Sub-sample peak of `w` as `(time, signed value)`.
///
/// Fits a parabola to the logarithm of the three samples around the
/// largest magnitude, which is exact for Gaussian peaks, and falls back to
/// a plain parabola if a neighbour changes sign.
pub fn interpolated_peak(w: &Waveform) -> (f64, f64) {
    let s = w.samples();
    let i = s.iter().enumerate().fold(0, |best, (k, v)| if v.abs() > s[best].abs() { k } else { best });
    let sign = s[i].signum();
    if i == 0 || i + 1 == s.len() {
        return (w.time(i), s[i]);
    }
    let (a, b, c) = (sign * s[i - 1], sign * s[i], sign * s[i + 1]);
    let (ya, yb, yc, log) = if a > 0.0 && c > 0.0 { (a.ln(), b.ln(), c.ln(), true) } else { (a, b, c, false) };
    let denom = ya - 2.0 * yb + yc;
    if denom == 0.0 {
        return (w.time(i), s[i]);
    }
    let p = 0.5 * (ya - yc) / denom;
    let y = yb - 0.25 * (ya - yc) * p;
    let peak = if log { y.exp() } else { y };
    (w.time(i) + p * w.dt(), sign * peak)
}

/// Measures channel `n` of `spec` with all other channels zeroed.
pub fn measure_channel(spec: &ProcessorSpec, n: usize, probe: &Waveform) -> Result<ChannelMeasurement> {
    measure_channel_shot(spec, n, probe, 0)
}

/// [`measure_channel`] with an explicit comb-noise draw.
pub fn measure_channel_shot(spec: &ProcessorSpec, n: usize, probe: &Waveform, shot: u64) -> Result<ChannelMeasurement> {
    Ok(peak_relative_to(probe, &simulate_channel(probe, spec, n, shot)?))
}

/// Measures every channel of `spec`, in channel order.
pub fn measure_all_channels(spec: &ProcessorSpec, probe: &Waveform, shot: u64) -> Result<Vec<ChannelMeasurement>> {
    Ok(simulate_channels(probe, spec, shot)?.iter().map(|r| peak_relative_to(probe, r)).collect())
}

fn peak_relative_to(probe: &Waveform, response: &Waveform) -> ChannelMeasurement {
    let (tp, vp) = interpolated_peak(probe);
    let (tr, vr) = interpolated_peak(response);
    ChannelMeasurement { amplitude: vr / vp, delay: tr - tp }
}

/// Runs the feedback loop against `target` and returns `spec` carrying the
/// final corrections, with a report of the run.
pub fn calibrate(
    spec: &ProcessorSpec,
    target: &TapSet,
    cfg: &CalibrationConfig,
) -> Result<(ProcessorSpec, CalibrationReport)> {
    cfg.validate()?;
    spec.validate()?;
    if target.len() != spec.m {
        return Err(Error::param("target", format!("{} weights for {} taps", target.len(), spec.m)));
    }
    let probe = standard_probe();
    let a = target.weights();
    let scale = target.max_abs_weight();
    if scale == 0.0 {
        return Err(Error::param("target", "all target weights are zero"));
    }
    let delta_t = spec.delta_t();
    let mut corr = spec.corrections.clone().unwrap_or_else(|| ChannelCorrections::identity(spec.m));
    let mut residuals = Vec::new();
    let mut converged = false;

    for iter in 1..=cfg.max_iter {
        let mut work = spec.clone();
        work.corrections = Some(corr.clone());
        let shot = if cfg.redraw_noise { iter as u64 } else { 0 };
        let measured = measure_all_channels(&work, &probe, shot)?;
        let errors: Vec<f64> = a.iter().zip(&measured).map(|(t, m)| t - m.amplitude).collect();
        let residual = errors.iter().fold(0.0_f64, |r, e| r.max(e.abs())) / scale;
        residuals.push(residual);
        if residual < cfg.tol {
            converged = true;
            break;
        }
        if iter == cfg.max_iter {
            break;
        }
        for (n, (m, e)) in measured.iter().zip(&errors).enumerate() {
            if m.amplitude == 0.0 {
                if a[n] != 0.0 {
                    return Err(Error::DeadChannel(n));
                }
                continue;
            }
            corr.gains[n] *= 1.0 + cfg.damping * e / m.amplitude;
            if cfg.phase_correction {
                corr.delays[n] -= cfg.damping * (m.delay - n as f64 * delta_t);
            }
        }
    }

    let report = CalibrationReport {
        iterations_used: residuals.len(),
        residuals,
        converged,
        gains: corr.gains.clone(),
        delays: corr.delays.clone(),
    };
    let mut out = spec.clone();
    out.corrections = Some(corr);
    Ok((out, report))
}
