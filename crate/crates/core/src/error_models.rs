//! Parameterized experimental error sources.
//!
//! Every stochastic model draws from its own ChaCha stream keyed by the
//! budget seed and a fixed per-source label, so switching one source on or
//! off never changes the draws of another. Draws are unit-scale (standard
//! normal or uniform on `[-1, 1]`) and then multiplied by the configured
//! magnitude, so sweeping a magnitude reuses the same random numbers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taps::{LinkGeometry, TapSet, SPEED_OF_LIGHT};

/// Spectral shape of the comb intensity-noise floor across channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FloorShape {
    #[default]
    #[serde(alias = "flat")]
    Flat,
    #[serde(alias = "sinc")]
    Sinc,
}

impl FloorShape {
    pub fn label(self) -> &'static str {
        match self {
            FloorShape::Flat => "FLAT",
            FloorShape::Sinc => "SINC",
        }
    }
}

/// Index origin for the third-order-dispersion delay skew.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TodOrigin {
    /// `n` counted from the first tap.
    #[serde(alias = "first_tap")]
    FirstTap,
    /// `n - (M - 1) / 2`, counted from the centre wavelength.
    #[default]
    #[serde(alias = "center")]
    Center,
}

/// Magnitudes of all error sources plus the seed that drives them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorBudget {
    /// Per-line OSNR in dB; `None` is noiseless.
    pub osnr_db: Option<f64>,
    pub floor_shape: FloorShape,
    /// Modulator chirp parameter α.
    pub alpha: f64,
    /// Applies the geometry's D3 as a per-tap delay skew.
    pub tod_enabled: bool,
    /// Random tap-coefficient error range ΔPR as a fraction.
    pub rtce_range: f64,
    /// Delay-element error t_v as a fraction of ΔT.
    pub delay_jitter: f64,
    pub seed: u64,
    /// Applies the dispersion-induced RF fade even when α is zero.
    pub sod_fade: bool,
    pub tod_origin: TodOrigin,
}

impl Default for ErrorBudget {
    fn default() -> Self {
        Self::zero()
    }
}

impl ErrorBudget {
    /// Every source switched off.
    pub fn zero() -> Self {
        Self {
            osnr_db: None,
            floor_shape: FloorShape::Flat,
            alpha: 0.0,
            tod_enabled: false,
            rtce_range: 0.0,
            delay_jitter: 0.0,
            seed: 0,
            sod_fade: false,
            tod_origin: TodOrigin::Center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(o) = self.osnr_db {
            if !(o.is_finite() && o > 0.0) {
                return Err(Error::param("osnr_db", format!("must be positive or null, got {o}")));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be non-negative, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.rtce_range) {
            return Err(Error::param("rtce_range", format!("must lie in [0, 1), got {}", self.rtce_range)));
        }
        if !(0.0..0.5).contains(&self.delay_jitter) {
            return Err(Error::param("delay_jitter", format!("must lie in [0, 0.5), got {}", self.delay_jitter)));
        }
        Ok(())
    }

    /// True when the per-channel RF filter differs from unity.
    pub fn needs_channel_filter(&self) -> bool {
        self.sod_fade || self.alpha != 0.0
    }
}

/// Labels of the independent random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    CombNoise,
    Rtce,
    DelayJitter,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::CombNoise => 1,
            Stream::Rtce => 2,
            Stream::DelayJitter => 3,
        }
    }
}

/// Random stream for `source`. `shot` selects an independent re-draw of the
/// same source; shot 0 is the frozen draw used by ordinary simulations.
pub fn stream_rng(seed: u64, source: Stream, shot: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((source.id() << 32) | (shot & 0xFFFF_FFFF));
    rng
}

fn unit_uniform(rng: &mut ChaCha20Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Chirp parameter `(γ1 + γ2) / (γ1 − γ2)` of a dual-drive modulator.
pub fn chirp_alpha(gamma1: f64, gamma2: f64) -> Result<f64> {
    if gamma1 == gamma2 {
        return Err(Error::param("gamma2", "equal arm efficiencies leave the chirp undefined"));
    }
    Ok((gamma1 + gamma2) / (gamma1 - gamma2))
}

/// Per-channel envelope of the noise floor, normalized to a maximum of 1.
///
/// SINC uses `sinc²(2(n − (M−1)/2)/M)`, with first nulls at the band edges.
pub fn noise_envelope(shape: FloorShape, m: usize) -> Vec<f64> {
    match shape {
        FloorShape::Flat => vec![1.0; m],
        FloorShape::Sinc => {
            let c = (m as f64 - 1.0) / 2.0;
            let raw: Vec<f64> = (0..m)
                .map(|n| {
                    let x = 2.0 * (n as f64 - c) / m as f64;
                    let s = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
                    s * s
                })
                .collect();
            let peak = raw.iter().cloned().fold(0.0_f64, f64::max);
            raw.into_iter().map(|v| v / peak).collect()
        }
    }
}

/// Adds zero-mean Gaussian noise of standard deviation
/// `max|a| · 10^(−OSNR/10) · env(n)` to every weight.
pub fn comb_noise(taps: &TapSet, budget: &ErrorBudget) -> Result<TapSet> {
    comb_noise_shot(taps, budget, 0)
}

/// [`comb_noise`] with an explicit re-draw index.
pub fn comb_noise_shot(taps: &TapSet, budget: &ErrorBudget, shot: u64) -> Result<TapSet> {
    let Some(osnr) = budget.osnr_db else {
        return Ok(taps.clone());
    };
    let sigma = taps.max_abs_weight() * 10f64.powf(-osnr / 10.0);
    let env = noise_envelope(budget.floor_shape, taps.len());
    let mut rng = stream_rng(budget.seed, Stream::CombNoise, shot);
    let weights = taps
        .weights()
        .iter()
        .zip(&env)
        .map(|(&a, &e)| {
            let z: f64 = rng.sample(StandardNormal);
            a + sigma * e * z
        })
        .collect();
    taps.replace_weights(weights)
}

/// Dispersion phase `θ = π L D2 λ² f² / c` (radians) at RF frequency `f`
/// for a carrier at `lambda_nm`.
pub fn dispersion_angle(f: f64, lambda_nm: f64, geometry: &LinkGeometry) -> f64 {
    let lam = lambda_nm * 1e-9;
    PI * geometry.length_si() * geometry.d2_si() * lam * lam * f * f / SPEED_OF_LIGHT
}

/// RF power factor `cos θ` of a dispersive double-sideband link, clamped
/// below at zero.
pub fn sod_fade_power(f: f64, lambda_nm: f64, geometry: &LinkGeometry) -> f64 {
    dispersion_angle(f, lambda_nm, geometry).cos().max(0.0)
}

/// Per-channel RF amplitude transfer for a chirped modulator followed by
/// dispersion: `A(f) = √(1+α²) cos(θ(f) + atan α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelFilter {
    /// Carrier wavelength of the channel in nm.
    pub wavelength: f64,
    pub alpha: f64,
    /// `θ(f) = angle_per_hz2 · f²`.
    pub angle_per_hz2: f64,
}

impl ChannelFilter {
    /// Gain at RF frequency `f`, evaluated as `cos θ − α sin θ`, which equals
    /// the closed form and is exactly 1 at DC.
    pub fn gain(&self, f: f64) -> f64 {
        let theta = self.angle_per_hz2 * f * f;
        theta.cos() - self.alpha * theta.sin()
    }

    pub fn angle(&self, f: f64) -> f64 {
        self.angle_per_hz2 * f * f
    }
}

/// Filter of channel `n` in an `m`-channel comb.
pub fn chirped_channel_filter(n: usize, m: usize, geometry: &LinkGeometry, alpha: f64) -> ChannelFilter {
    let wavelength = geometry.channel_wavelength(n, m);
    ChannelFilter { wavelength, alpha, angle_per_hz2: dispersion_angle(1.0, wavelength, geometry) }
}

/// Third-order-dispersion delay `D3 L Δλ² n²` in seconds, `n` counted from
/// the first tap.
pub fn tod_extra_delay(n: usize, geometry: &LinkGeometry) -> f64 {
    tod_delay_at(n as f64, geometry)
}

fn tod_delay_at(index: f64, geometry: &LinkGeometry) -> f64 {
    let dl = geometry.delta_lambda_si();
    geometry.d3_si() * geometry.length_si() * dl * dl * index * index
}

/// TOD delays for all `m` taps under the chosen index origin.
pub fn tod_delays(m: usize, geometry: &LinkGeometry, origin: TodOrigin) -> Vec<f64> {
    let shift = match origin {
        TodOrigin::FirstTap => 0.0,
        TodOrigin::Center => (m as f64 - 1.0) / 2.0,
    };
    (0..m).map(|n| tod_delay_at(n as f64 - shift, geometry)).collect()
}

/// Multiplies every weight by `1 + u_n`, `u_n` uniform on `[−ΔPR, ΔPR]`.
pub fn rtce(taps: &TapSet, budget: &ErrorBudget) -> Result<TapSet> {
    if budget.rtce_range == 0.0 {
        return Ok(taps.clone());
    }
    let mut rng = stream_rng(budget.seed, Stream::Rtce, 0);
    let u = unit_uniform(&mut rng, taps.len());
    let weights = taps.weights().iter().zip(&u).map(|(&a, &v)| a * (1.0 + budget.rtce_range * v)).collect();
    taps.replace_weights(weights)
}

/// Adds `v_n ΔT`, `v_n` uniform on `[−t_v, t_v]`, to every tap delay.
pub fn delay_jitter(taps: &TapSet, budget: &ErrorBudget) -> Result<TapSet> {
    if budget.delay_jitter == 0.0 {
        return Ok(taps.clone());
    }
    let mut rng = stream_rng(budget.seed, Stream::DelayJitter, 0);
    let v = unit_uniform(&mut rng, taps.len());
    let dt = taps.delta_t();
    let delays = taps.extra_delays().iter().zip(&v).map(|(&d, &x)| d + budget.delay_jitter * x * dt).collect();
    taps.replace_extra_delays(delays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::TargetFunction;
    use crate::taps::design_taps;

    fn geo() -> LinkGeometry {
        LinkGeometry::default()
    }

    fn ht80() -> TapSet {
        design_taps(&TargetFunction::Ht, 80, &geo()).unwrap()
    }

    #[test]
    fn chirp_examples() {
        assert_eq!(chirp_alpha(2.0, -2.0).unwrap(), 0.0);
        assert_eq!(chirp_alpha(1.7, 0.0).unwrap(), 1.0);
        assert_eq!(chirp_alpha(3.0, 1.0).unwrap(), 2.0);
        assert!(chirp_alpha(1.0, 1.0).is_err());
    }

    #[test]
    fn infinite_osnr_is_identity() {
        let t = ht80();
        assert_eq!(comb_noise(&t, &ErrorBudget::zero()).unwrap(), t);
    }

    #[test]
    fn flat_noise_has_configured_std() {
        let t = TapSet::new(vec![1.0; 100_000], 1e-11).unwrap();
        let b = ErrorBudget { osnr_db: Some(20.0), seed: 9, ..ErrorBudget::zero() };
        let noisy = comb_noise(&t, &b).unwrap();
        let d: Vec<f64> = noisy.weights().iter().map(|w| w - 1.0).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var.sqrt() - 0.01).abs() < 0.0005, "std {}", var.sqrt());
        assert_eq!(noisy.extra_delays(), t.extra_delays());
    }

    #[test]
    fn sinc_envelope_peaks_at_one_with_edge_nulls() {
        let e = noise_envelope(FloorShape::Sinc, 80);
        let peak = e.iter().cloned().fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
        assert!(e[0] < 1e-3 && e[79] < 1e-3);
        for n in 0..80 {
            assert!((e[n] - e[79 - n]).abs() < 1e-15);
        }
        let odd = noise_envelope(FloorShape::Sinc, 5);
        assert_eq!(odd[2], 1.0);
    }

    #[test]
    fn fade_examples() {
        let g = geo();
        assert_eq!(sod_fade_power(0.0, 1550.0, &g), 1.0);
        let theta = dispersion_angle(5e9, 1550.0, &g);
        // Independent evaluation with every factor written out in SI.
        let oracle = PI * 4.8e3 * 17.4e-6 * (1550e-9f64).powi(2) * 25e18 / 299_792_458.0;
        assert!((theta - oracle).abs() < 1e-15);
        assert!((theta - 5.2567e-2).abs() < 1e-5);
        let p = sod_fade_power(5e9, 1550.0, &g);
        assert!((p - 0.99862).abs() < 5e-6);
        assert!((p - oracle.cos()).abs() < 1e-15);
        let db = -10.0 * p.log10();
        assert!((db - 0.006).abs() < 0.0005);
    }

    #[test]
    fn fade_is_even_and_decreasing_to_first_null() {
        let g = geo();
        let null = (0.5 * PI / dispersion_angle(1.0, 1550.0, &g)).sqrt();
        let mut last = 1.0;
        for i in 1..=100 {
            let f = null * i as f64 / 100.0;
            let p = sod_fade_power(f, 1550.0, &g);
            assert_eq!(p, sod_fade_power(-f, 1550.0, &g));
            assert!(p < last);
            last = p;
        }
        assert_eq!(sod_fade_power(1.5 * null, 1550.0, &g), 0.0);
    }

    #[test]
    fn channel_filter_reduces_to_fade_and_is_dc_normalized() {
        let g = geo();
        for n in [0usize, 17, 79] {
            let unchirped = chirped_channel_filter(n, 80, &g, 0.0);
            assert_eq!(unchirped.wavelength, g.channel_wavelength(n, 80));
            for f in [0.0, 1e9, 5e9, 14e9] {
                assert_eq!(unchirped.gain(f), sod_fade_power(f, unchirped.wavelength, &g));
            }
            for a in [0.1, 0.5, 0.8, 3.0] {
                let c = chirped_channel_filter(n, 80, &g, a);
                assert_eq!(c.gain(0.0), 1.0);
                let th = c.angle(7e9);
                let closed = (1.0 + a * a).sqrt() * (th + a.atan()).cos();
                assert!((c.gain(7e9) - closed).abs() < 1e-14);
            }
        }
        let first = chirped_channel_filter(0, 80, &g, 0.0).wavelength;
        assert!((first - (1550.0 - 39.5 * 0.4)).abs() < 1e-12);
    }

    #[test]
    fn tod_examples() {
        let g = geo();
        assert_eq!(tod_extra_delay(0, &g), 0.0);
        let flat = LinkGeometry { d3: 0.0, ..g };
        assert!((0..80).all(|n| tod_extra_delay(n, &flat) == 0.0));
        let d = tod_extra_delay(10, &g);
        assert!((d - 6.3744e-12).abs() < 1e-16, "{d}");
        let centred = tod_delays(80, &g, TodOrigin::Center);
        assert!((centred[0] - centred[79]).abs() < 1e-24);
        assert_eq!(tod_delays(80, &g, TodOrigin::FirstTap)[10], d);
    }

    #[test]
    fn rtce_bounds_and_identity() {
        let t = ht80();
        assert_eq!(rtce(&t, &ErrorBudget::zero()).unwrap(), t);
        let b = ErrorBudget { rtce_range: 0.05, seed: 4, ..ErrorBudget::zero() };
        let p = rtce(&t, &b).unwrap();
        for (a, q) in t.weights().iter().zip(p.weights()) {
            assert!((q - a).abs() <= 0.05 * a.abs() * (1.0 + 1e-12));
        }
        assert_ne!(p, t);
    }

    #[test]
    fn jitter_bounds_and_identity() {
        let t = ht80();
        assert_eq!(delay_jitter(&t, &ErrorBudget::zero()).unwrap(), t);
        let b = ErrorBudget { delay_jitter: 0.04, seed: 4, ..ErrorBudget::zero() };
        let p = delay_jitter(&t, &b).unwrap();
        for d in p.extra_delays() {
            assert!(d.abs() <= 0.04 * t.delta_t() * (1.0 + 1e-12));
        }
        assert_eq!(p.weights(), t.weights());
    }

    #[test]
    fn draws_are_reproducible_and_seed_dependent() {
        let t = ht80();
        let b = ErrorBudget { osnr_db: Some(15.0), rtce_range: 0.1, seed: 11, ..ErrorBudget::zero() };
        assert_eq!(comb_noise(&t, &b).unwrap(), comb_noise(&t, &b).unwrap());
        assert_eq!(rtce(&t, &b).unwrap(), rtce(&t, &b).unwrap());
        let other = ErrorBudget { seed: 12, ..b.clone() };
        assert_ne!(comb_noise(&t, &b).unwrap(), comb_noise(&t, &other).unwrap());
        assert_ne!(comb_noise_shot(&t, &b, 1).unwrap(), comb_noise(&t, &b).unwrap());
    }

    #[test]
    fn budget_validation() {
        assert!(ErrorBudget::zero().validate().is_ok());
        let bad = [
            ErrorBudget { osnr_db: Some(0.0), ..ErrorBudget::zero() },
            ErrorBudget { alpha: -0.1, ..ErrorBudget::zero() },
            ErrorBudget { rtce_range: 1.0, ..ErrorBudget::zero() },
            ErrorBudget { delay_jitter: 0.5, ..ErrorBudget::zero() },
        ];
        for b in bad {
            assert!(b.validate().is_err(), "{b:?}");
        }
    }
}
