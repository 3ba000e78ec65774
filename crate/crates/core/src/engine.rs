//! Processor synthesis: `s(t) = Σ a'_n · (A_n ∗ f)(t − nΔT − τ_n)`.
//!
//! The output is built in the frequency domain from the input spectrum, the
//! perturbed weights `a'_n`, the per-tap delays and the optional per-channel
//! RF filters `A_n(f)`. Perturbations are applied in the order comb noise,
//! RTCE, delay jitter, TOD, followed by any calibration corrections.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_models::{
    chirped_channel_filter, comb_noise_shot, delay_jitter, rtce, tod_delays, ChannelFilter, ErrorBudget,
};
use crate::signal::{TargetFunction, Waveform};
use crate::spectral;
use crate::taps::{design_taps, LinkGeometry, TapSet};

/// Per-channel gain and delay trims written by the calibration loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelCorrections {
    pub gains: Vec<f64>,
    /// Additional delay per channel in seconds.
    pub delays: Vec<f64>,
}

impl ChannelCorrections {
    pub fn identity(m: usize) -> Self {
        Self { gains: vec![1.0; m], delays: vec![0.0; m] }
    }
}

/// Everything needed to simulate one processor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessorSpec {
    /// Tap count.
    #[serde(rename = "M")]
    pub m: usize,
    pub geometry: LinkGeometry,
    pub function: TargetFunction,
    pub budget: ErrorBudget,
    /// Overrides the inter-tap delay derived from the geometry (seconds).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tap_delay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrections: Option<ChannelCorrections>,
}

impl Default for ProcessorSpec {
    fn default() -> Self {
        Self::new(TargetFunction::Dif, 80)
    }
}

impl ProcessorSpec {
    /// Default link, zero error budget.
    pub fn new(function: TargetFunction, m: usize) -> Self {
        Self {
            m,
            geometry: LinkGeometry::default(),
            function,
            budget: ErrorBudget::zero(),
            tap_delay: None,
            corrections: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::param("M", format!("need at least 2 taps, got {}", self.m)));
        }
        self.geometry.validate()?;
        self.budget.validate()?;
        self.function.validate_for(self.m)?;
        if let Some(d) = self.tap_delay {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::param("tap_delay", format!("must be positive, got {d}")));
            }
        }
        if let Some(c) = &self.corrections {
            if c.gains.len() != self.m || c.delays.len() != self.m {
                return Err(Error::param("corrections", format!("need {} gains and delays", self.m)));
            }
            if c.gains.iter().chain(&c.delays).any(|x| !x.is_finite()) {
                return Err(Error::param("corrections", "values must be finite"));
            }
        }
        Ok(())
    }

    /// Effective inter-tap delay in seconds.
    pub fn delta_t(&self) -> f64 {
        self.tap_delay.unwrap_or_else(|| self.geometry.tap_delay())
    }

    /// Error-free designed taps with the effective inter-tap delay.
    pub fn design(&self) -> Result<TapSet> {
        let taps = design_taps(&self.function, self.m, &self.geometry)?;
        match self.tap_delay {
            Some(d) => taps.replace_delta_t(d),
            None => Ok(taps),
        }
    }

    pub fn with_budget(mut self, budget: ErrorBudget) -> Self {
        self.budget = budget;
        self
    }
}

/// Taps and channel filters after every error source and correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub taps: TapSet,
    pub filters: Option<Vec<ChannelFilter>>,
}

/// Applies the budget and corrections of `spec` to its designed taps.
/// `shot` re-draws the comb noise; 0 is the frozen draw.
pub fn realize(spec: &ProcessorSpec, shot: u64) -> Result<Realization> {
    spec.validate()?;
    let b = &spec.budget;
    let mut taps = comb_noise_shot(&spec.design()?, b, shot)?;
    taps = rtce(&taps, b)?;
    taps = delay_jitter(&taps, b)?;
    if b.tod_enabled {
        let tod = tod_delays(spec.m, &spec.geometry, b.tod_origin);
        let delays = taps.extra_delays().iter().zip(&tod).map(|(d, t)| d + t).collect();
        taps = taps.replace_extra_delays(delays)?;
    }
    if let Some(c) = &spec.corrections {
        let w = taps.weights().iter().zip(&c.gains).map(|(a, g)| a * g).collect();
        let d = taps.extra_delays().iter().zip(&c.delays).map(|(a, g)| a + g).collect();
        taps = TapSet::with_delays(w, taps.delta_t(), d)?;
    }
    let filters = b
        .needs_channel_filter()
        .then(|| (0..spec.m).map(|n| chirped_channel_filter(n, spec.m, &spec.geometry, b.alpha)).collect());
    Ok(Realization { taps, filters })
}

/// Runs the processor described by `spec` on `input`.
pub fn simulate(input: &Waveform, spec: &ProcessorSpec) -> Result<Waveform> {
    let r = realize(spec, 0)?;
    simulate_taps(input, &r.taps, r.filters.as_deref())
}

/// Output of channel `n` alone, all other channels zeroed.
pub fn simulate_channel(input: &Waveform, spec: &ProcessorSpec, n: usize, shot: u64) -> Result<Waveform> {
    if n >= spec.m {
        return Err(Error::ChannelOutOfRange { index: n, count: spec.m });
    }
    let r = realize(spec, shot)?;
    let weights = (0..spec.m).map(|i| if i == n { r.taps.weights()[i] } else { 0.0 }).collect();
    let taps = r.taps.replace_weights(weights)?;
    simulate_taps(input, &taps, r.filters.as_deref())
}

/// Every single-channel output of `spec`, in channel order.
///
/// Equivalent to calling [`simulate_channel`] for each channel, but the
/// processor is realized and the input transformed only once.
pub fn simulate_channels(input: &Waveform, spec: &ProcessorSpec, shot: u64) -> Result<Vec<Waveform>> {
    let r = realize(spec, shot)?;
    check_window(input, &r.taps)?;
    let spectrum = spectral::forward(input.samples());
    (0..spec.m)
        .map(|n| {
            let f = r.filters.as_ref().map(|f| f[n]);
            respond(input, spectrum.clone(), &[r.taps.weights()[n]], &[r.taps.tap_time(n)], f.as_slice())
        })
        .collect()
}

/// Shift-and-add of explicit taps and optional per-channel filters.
pub fn simulate_taps(input: &Waveform, taps: &TapSet, filters: Option<&[ChannelFilter]>) -> Result<Waveform> {
    if let Some(f) = filters {
        if f.len() != taps.len() {
            return Err(Error::param("filters", format!("{} filters for {} taps", f.len(), taps.len())));
        }
    }
    check_window(input, taps)?;
    let active: Vec<usize> = (0..taps.len()).filter(|&n| taps.weights()[n] != 0.0).collect();
    let times: Vec<f64> = active.iter().map(|&n| taps.tap_time(n)).collect();
    let weights: Vec<f64> = active.iter().map(|&n| taps.weights()[n]).collect();
    let filters: Vec<ChannelFilter> = filters.map_or_else(Vec::new, |f| active.iter().map(|&n| f[n]).collect());
    respond(input, spectral::forward(input.samples()), &weights, &times, &filters)
}

/// Applies `Σ a_n·A_n(f)·e^{-j2πf t_n}` to `spectrum`; an empty `filters`
/// slice means every `A_n` is 1.
fn respond(
    input: &Waveform,
    mut spectrum: Vec<Complex64>,
    weights: &[f64],
    times: &[f64],
    filters: &[ChannelFilter],
) -> Result<Waveform> {
    if weights.iter().all(|&a| a == 0.0) {
        return input.with_samples(vec![0.0; input.len()]);
    }
    spectral::apply_hermitian(&mut spectrum, input.dt(), |f| {
        let w = -2.0 * PI * f;
        let mut h = Complex64::new(0.0, 0.0);
        if filters.is_empty() {
            for (a, t) in weights.iter().zip(times) {
                h += a * Complex64::from_polar(1.0, w * t);
            }
        } else {
            for ((a, t), c) in weights.iter().zip(times).zip(filters) {
                h += a * c.gain(f) * Complex64::from_polar(1.0, w * t);
            }
        }
        h
    });
    let out = spectral::inverse_real(spectrum);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("processor output".into()));
    }
    input.with_samples(out)
}

fn check_window(input: &Waveform, taps: &TapSet) -> Result<()> {
    let Some((first, last)) = input.support(1e-12) else {
        return Ok(());
    };
    let dt = input.dt();
    let (lo, hi) = (0..taps.len())
        .map(|n| taps.tap_time(n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    let start = first as f64 * dt + lo;
    let end = last as f64 * dt + hi;
    if start < 0.0 || end > input.duration() {
        return Err(Error::WindowOverflow(format!(
            "delayed input spans {:.4e}..{:.4e} s of a {:.4e} s window",
            start,
            end,
            input.duration()
        )));
    }
    Ok(())
}

/// Processor configurations of the integrated-versus-discrete comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "PROCESSOR_1", alias = "p1")]
    Processor1,
    #[serde(rename = "PROCESSOR_2", alias = "p2")]
    Processor2,
    #[serde(rename = "PROCESSOR_3", alias = "p3")]
    Processor3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Processor1, Preset::Processor2, Preset::Processor3];

    pub fn label(self) -> &'static str {
        match self {
            Preset::Processor1 => "PROCESSOR_1",
            Preset::Processor2 => "PROCESSOR_2",
            Preset::Processor3 => "PROCESSOR_3",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "1" | "processor_1" => Ok(Preset::Processor1),
            "p2" | "2" | "processor_2" => Ok(Preset::Processor2),
            "p3" | "3" | "processor_3" => Ok(Preset::Processor3),
            other => Err(Error::param("preset", format!("unknown preset `{other}`"))),
        }
    }
}

/// Preset processor running a differentiator; change `function` as needed.
///
/// | preset | M  | OSNR  | α   | t_v | RTCE |
/// |--------|----|-------|-----|-----|------|
/// | 1      | 80 | 20 dB | 0.1 | 4 % | 5 %  |
/// | 2      | 8  | 20 dB | 0.8 | 3 % | 9 %  |
/// | 3      | 20 | 20 dB | 0.8 | 3 % | 9 %  |
///
/// All three share the default link, so ΔT = 33.408 ps, and include the
/// dispersion-induced RF fade.
pub fn preset(id: Preset) -> ProcessorSpec {
    let (m, alpha, tv, prc) = match id {
        Preset::Processor1 => (80, 0.1, 0.04, 0.05),
        Preset::Processor2 => (8, 0.8, 0.03, 0.09),
        Preset::Processor3 => (20, 0.8, 0.03, 0.09),
    };
    let budget = ErrorBudget {
        osnr_db: Some(20.0),
        alpha,
        rtce_range: prc,
        delay_jitter: tv,
        sod_fade: true,
        ..ErrorBudget::zero()
    };
    ProcessorSpec::new(TargetFunction::Dif, m).with_budget(budget)
}
