//! Accuracy of a single processor on the standard test pulse.
//!
//! The processor output is divided by the nominal gain of its function
//! (ΔT for the differentiator, 1/ΔT for the integrator, 1 for the Hilbert
//! transformer), shifted onto the reference, and both traces are scaled by
//! the peak of the reference. The RMSE is taken over the capture window
//! `t_c ± CAPTURE_HALF_WIDTH` around the input pulse.

use std::sync::OnceLock;

use crate::engine::{simulate, ProcessorSpec};
use crate::error::{Error, Result};
use crate::signal::{gaussian_pulse, ideal_output, rmse, TargetFunction, Waveform};

/// Sample interval of the standard grid, seconds.
pub const STANDARD_DT: f64 = 1e-12;
/// Samples in the standard window.
pub const STANDARD_SAMPLES: usize = 8192;
/// FWHM of the standard Gaussian test pulse, seconds.
pub const PULSE_FWHM: f64 = 0.17e-9;
/// Half-width of the RMSE window around the input pulse, seconds. It spans
/// the full response of an 80-tap processor at the default tap delay.
pub const CAPTURE_HALF_WIDTH: f64 = 2.64e-9;

struct Context {
    input: Waveform,
    refs: [Waveform; 3],
}

fn context() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| {
        let input = gaussian_pulse(PULSE_FWHM, 0.0, STANDARD_DT, STANDARD_SAMPLES).expect("valid standard pulse");
        let refs = TargetFunction::ANALYTIC.map(|f| ideal_output(&f, &input).expect("standard pulse is padded"));
        Context { input, refs }
    })
}

/// The standard Gaussian test pulse, peaked at sample `STANDARD_SAMPLES / 2`.
pub fn standard_input() -> &'static Waveform {
    &context().input
}

/// Analytic reference for the standard pulse.
pub fn standard_reference(func: &TargetFunction) -> Result<&'static Waveform> {
    let ctx = context();
    match func {
        TargetFunction::Dif => Ok(&ctx.refs[0]),
        TargetFunction::Int => Ok(&ctx.refs[1]),
        TargetFunction::Ht => Ok(&ctx.refs[2]),
        TargetFunction::PhaseEncode(_) => Err(Error::UnsupportedReference),
    }
}

/// Delay by which the processor output trails the reference.
///
/// The centred DIF and HT responses lag by `(M − 1) ΔT / 2`. The integrator
/// accumulates from the first tap and its discrete sum leads the continuous
/// integral by half a tap, so its bulk delay is `−ΔT / 2`.
pub fn alignment_delay(func: &TargetFunction, m: usize, delta_t: f64) -> f64 {
    match func {
        TargetFunction::Int => -0.5 * delta_t,
        _ => (m as f64 - 1.0) * delta_t / 2.0,
    }
}

/// Ratio between the designed processor output and the analytic reference.
pub fn design_gain(func: &TargetFunction, delta_t: f64) -> f64 {
    match func {
        TargetFunction::Dif => delta_t,
        TargetFunction::Int => 1.0 / delta_t,
        _ => 1.0,
    }
}

/// Processor output and reference, aligned and scaled as described in the
/// module docs, over the full window.
pub fn aligned_pair(spec: &ProcessorSpec) -> Result<(Waveform, Waveform)> {
    let reference = standard_reference(&spec.function)?;
    let out = simulate(standard_input(), spec)?;
    let dt = spec.delta_t();
    let peak = reference.peak_abs();
    let aligned = out
        .delayed(-alignment_delay(&spec.function, spec.m, dt))
        .scaled(1.0 / (design_gain(&spec.function, dt) * peak));
    Ok((aligned, reference.scaled(1.0 / peak)))
}

/// Sample range `[start, end)` of the capture window on the standard grid.
pub fn capture_window() -> (usize, usize) {
    let centre = STANDARD_SAMPLES / 2;
    let half = (CAPTURE_HALF_WIDTH / STANDARD_DT).round() as usize;
    (centre - half, centre + half + 1)
}

/// RMSE of `spec` on the standard pulse over the capture window.
pub fn evaluate(spec: &ProcessorSpec) -> Result<f64> {
    let (out, reference) = aligned_pair(spec)?;
    let (a, b) = capture_window();
    rmse(&reference.slice(a, b)?, &out.slice(a, b)?)
}
