//! Waveforms, test pulses, analytic references and the RMSE metric.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Padding level, relative to the peak, that the edge samples must stay under
/// before a spectral reference is computed.
pub const WRAP_TOLERANCE: f64 = 1e-12;

/// A uniformly sampled, real-valued time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Waveform {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl Waveform {
    /// Builds a waveform, rejecting `dt <= 0`, fewer than two samples and
    /// non-finite values.
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidWaveform(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidWaveform(format!("t0 must be finite, got {t0}")));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidWaveform(format!("need at least 2 samples, got {}", samples.len())));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidWaveform(format!("sample {i} is not finite")));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a waveform holds at least two samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(count - 1) * dt`.
    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Same grid, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::GridMismatch(format!("expected {} samples, got {}", self.samples.len(), samples.len())));
        }
        Self::new(self.t0, self.dt, samples)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { t0: self.t0, dt: self.dt, samples: self.samples.iter().map(|x| x * k).collect() }
    }

    /// Copy shifted later in time by `tau` seconds (earlier if negative) with
    /// an exact linear-phase spectral shift on the same grid.
    pub fn delayed(&self, tau: f64) -> Self {
        Self { t0: self.t0, dt: self.dt, samples: spectral::delay(&self.samples, self.dt, tau) }
    }

    /// Sub-range `[start, end)` of the samples as a new waveform.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return Err(Error::GridMismatch(format!("slice {start}..{end} outside 0..{}", self.samples.len())));
        }
        Self::new(self.time(start), self.dt, self.samples[start..end].to_vec())
    }

    /// Indices of the first and last samples whose magnitude exceeds
    /// `rel * peak`, or `None` for an all-zero waveform.
    pub fn support(&self, rel: f64) -> Option<(usize, usize)> {
        let thr = self.peak_abs() * rel;
        let first = self.samples.iter().position(|x| x.abs() > thr)?;
        let last = self.samples.iter().rposition(|x| x.abs() > thr)?;
        Some((first, last))
    }
}

/// Processing function realized by a tap set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetFunction {
    /// First-order differentiator, `H = jω`.
    #[serde(rename = "DIF", alias = "dif", alias = "differentiator")]
    Dif,
    /// Integrator, `H = 1/(jω)`.
    #[serde(rename = "INT", alias = "int", alias = "integrator")]
    Int,
    /// Hilbert transformer, `H = j` for `ω >= 0` and `-j` below.
    #[serde(rename = "HT", alias = "ht", alias = "hilbert")]
    Ht,
    /// Fixed ±1 tap pattern used for phase encoding.
    #[serde(rename = "PHASE_ENCODE", alias = "phase_encode")]
    PhaseEncode(Vec<i8>),
}

impl TargetFunction {
    /// The three functions with analytic references.
    pub const ANALYTIC: [TargetFunction; 3] = [TargetFunction::Dif, TargetFunction::Int, TargetFunction::Ht];

    pub fn label(&self) -> &'static str {
        match self {
            TargetFunction::Dif => "DIF",
            TargetFunction::Int => "INT",
            TargetFunction::Ht => "HT",
            TargetFunction::PhaseEncode(_) => "PHASE_ENCODE",
        }
    }

    /// Checks a phase-encoding pattern against the tap count. The analytic
    /// functions accept any `m`.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        if let TargetFunction::PhaseEncode(p) = self {
            if p.len() != m {
                return Err(Error::param(
                    "function",
                    format!("phase-encoding pattern has {} entries for {m} taps", p.len()),
                ));
            }
            if let Some(bad) = p.iter().find(|&&s| s != 1 && s != -1) {
                return Err(Error::param("function", format!("pattern entry {bad} is not ±1")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    /// Parses `dif`/`differentiator`, `int`/`integrator` and `ht`/`hilbert`
    /// in any case.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dif" | "differentiator" => Ok(TargetFunction::Dif),
            "int" | "integrator" => Ok(TargetFunction::Int),
            "ht" | "hilbert" => Ok(TargetFunction::Ht),
            other => Err(Error::param("function", format!("unknown function `{other}`"))),
        }
    }
}

/// Unit-peak Gaussian pulse centred on sample `count / 2`.
///
/// `samples[i] = exp(-4 ln2 (t_i - t_c)^2 / fwhm^2)`. The window
/// `count * dt` must be at least `6 * fwhm`.
pub fn gaussian_pulse(fwhm: f64, t0: f64, dt: f64, count: usize) -> Result<Waveform> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(Error::param("fwhm", format!("must be positive, got {fwhm}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidWaveform(format!("dt must be positive, got {dt}")));
    }
    if (count as f64) * dt < 6.0 * fwhm {
        return Err(Error::WindowTooShort(format!(
            "{count} samples of {dt:e} s cannot hold a pulse of FWHM {fwhm:e} s (need 6 FWHM)"
        )));
    }
    let centre = count / 2;
    let k = 4.0 * LN_2 / (fwhm * fwhm);
    let samples = (0..count)
        .map(|i| {
            let t = (i as f64 - centre as f64) * dt;
            (-k * t * t).exp()
        })
        .collect();
    Waveform::new(t0, dt, samples)
}

fn check_padding(input: &Waveform) -> Result<()> {
    let peak = input.peak_abs();
    let s = input.samples();
    let edge = s[0].abs().max(s[s.len() - 1].abs());
    if edge > WRAP_TOLERANCE * peak {
        return Err(Error::WindowTooShort(format!(
            "edge samples reach {:.3e} of the peak; zero-pad the input",
            edge / peak.max(f64::MIN_POSITIVE)
        )));
    }
    Ok(())
}

/// Analytic output of an ideal processor.
///
/// DIF multiplies the spectrum by `j 2π f`. HT multiplies by `j sign(f)`,
/// the response realized by taps designed from `H_HT` under the causal delay
/// convention. INT is the running trapezoidal integral from the window start.
pub fn ideal_output(func: &TargetFunction, input: &Waveform) -> Result<Waveform> {
    let dt = input.dt();
    let samples = match func {
        TargetFunction::PhaseEncode(_) => return Err(Error::UnsupportedReference),
        TargetFunction::Int => {
            let s = input.samples();
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(s.len());
            out.push(0.0);
            for w in s.windows(2) {
                acc += 0.5 * (w[0] + w[1]) * dt;
                out.push(acc);
            }
            out
        }
        TargetFunction::Dif | TargetFunction::Ht => {
            check_padding(input)?;
            spectral_operator(matches!(func, TargetFunction::Dif), input.samples(), dt)
        }
    };
    input.with_samples(samples)
}

/// `j 2π f` (differentiator) or `j sign(f)` applied on the periodic grid.
fn spectral_operator(differentiate: bool, samples: &[f64], dt: f64) -> Vec<f64> {
    let mut spec = spectral::forward(samples);
    spectral::apply_hermitian(&mut spec, dt, |f| {
        if differentiate {
            Complex64::new(0.0, 2.0 * PI * f)
        } else if f > 0.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    spectral::inverse_real(spec)
}

fn check_same_grid(a: &Waveform, b: &Waveform) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    if (a.dt() - b.dt()).abs() > 1e-12 * a.dt() {
        return Err(Error::GridMismatch(format!("dt {:e} vs {:e}", a.dt(), b.dt())));
    }
    Ok(())
}

/// Root-mean-square difference over all samples of two waveforms on the
/// same grid.
pub fn rmse(ideal: &Waveform, actual: &Waveform) -> Result<f64> {
    check_same_grid(ideal, actual)?;
    let sum: f64 = ideal.samples().iter().zip(actual.samples()).map(|(y, x)| (y - x) * (y - x)).sum();
    Ok((sum / ideal.len() as f64).sqrt())
}

/// Advances `actual` by `bulk_delay` and scales both waveforms to unit peak.
pub fn normalize_and_align(actual: &Waveform, reference: &Waveform, bulk_delay: f64) -> Result<(Waveform, Waveform)> {
    check_same_grid(actual, reference)?;
    let aligned = actual.delayed(-bulk_delay);
    let pa = aligned.peak_abs();
    let pr = reference.peak_abs();
    if pa == 0.0 || pr == 0.0 {
        return Err(Error::ZeroWaveform);
    }
    Ok((aligned.scaled(1.0 / pa), reference.scaled(1.0 / pr)))
}
