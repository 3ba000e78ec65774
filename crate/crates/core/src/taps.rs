//! Tap-weight design, realized transfer functions and link bandwidth.
//!
//! Weights come from frequency sampling: the ideal response is sampled at
//! `M` uniform normalized frequencies, delayed to centre the impulse response
//! on tap `(M - 1) / 2`, and inverse transformed. Normalized frequency `π`
//! corresponds to half the RF free spectral range `1 / ΔT`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TargetFunction;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Dispersive link that turns comb spacing into inter-tap delay.
///
/// Fields use the customary engineering units; the `*_si` accessors return
/// SI values and are the only conversion site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkGeometry {
    /// Comb line spacing Δλ in nm.
    pub delta_lambda: f64,
    /// Fiber length L in km.
    #[serde(rename = "length_L")]
    pub length_l: f64,
    /// Second-order dispersion D2 in ps/nm/km.
    pub d2: f64,
    /// Third-order dispersion D3 in ps/nm²/km.
    pub d3: f64,
    /// Centre wavelength λc in nm.
    pub lambda0: f64,
}

impl Default for LinkGeometry {
    /// 0.4 nm spacing over 4.8 km of standard fiber at 1550 nm.
    fn default() -> Self {
        Self { delta_lambda: 0.4, length_l: 4.8, d2: 17.4, d3: 0.083, lambda0: 1550.0 }
    }
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta_lambda", self.delta_lambda),
            ("length_L", self.length_l),
            ("d2", self.d2),
            ("d3", self.d3),
            ("lambda0", self.lambda0),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.delta_lambda <= 0.0 {
            return Err(Error::param("delta_lambda", "must be positive"));
        }
        if self.length_l <= 0.0 {
            return Err(Error::param("length_L", "must be positive"));
        }
        if self.d2 == 0.0 {
            return Err(Error::param("d2", "must be nonzero, the tap delay would vanish"));
        }
        if !(1000.0..=2000.0).contains(&self.lambda0) {
            return Err(Error::param("lambda0", "must lie in 1000–2000 nm"));
        }
        Ok(())
    }

    pub fn delta_lambda_si(&self) -> f64 {
        self.delta_lambda * 1e-9
    }

    pub fn length_si(&self) -> f64 {
        self.length_l * 1e3
    }

    /// D2 in s/m².
    pub fn d2_si(&self) -> f64 {
        self.d2 * 1e-12 / 1e-9 / 1e3
    }

    /// D3 in s/m³.
    pub fn d3_si(&self) -> f64 {
        self.d3 * 1e-12 / 1e-18 / 1e3
    }

    pub fn lambda0_si(&self) -> f64 {
        self.lambda0 * 1e-9
    }

    /// Inter-tap delay `ΔT = Δλ · L · D2` in seconds.
    pub fn tap_delay(&self) -> f64 {
        self.delta_lambda_si() * self.length_si() * self.d2_si()
    }

    /// Comb line spacing in Hz, `c · Δλ / λc²`.
    pub fn comb_spacing_hz(&self) -> f64 {
        SPEED_OF_LIGHT * self.delta_lambda_si() / (self.lambda0_si() * self.lambda0_si())
    }

    /// Wavelength in nm of channel `n` out of `m`, centred on `lambda0`.
    pub fn channel_wavelength(&self, n: usize, m: usize) -> f64 {
        self.lambda0 + (n as f64 - (m as f64 - 1.0) / 2.0) * self.delta_lambda
    }
}

/// Signed tap weights with the nominal inter-tap delay and per-tap offsets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TapSet {
    weights: Vec<f64>,
    delta_t: f64,
    extra_delays: Vec<f64>,
}

impl TapSet {
    /// Tap set with zero extra delays.
    pub fn new(weights: Vec<f64>, delta_t: f64) -> Result<Self> {
        let m = weights.len();
        Self::with_delays(weights, delta_t, vec![0.0; m])
    }

    pub fn with_delays(weights: Vec<f64>, delta_t: f64, extra_delays: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("weights", "need at least one tap"));
        }
        if extra_delays.len() != weights.len() {
            return Err(Error::param(
                "extra_delays",
                format!("{} offsets for {} taps", extra_delays.len(), weights.len()),
            ));
        }
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::param("delta_t", format!("must be positive, got {delta_t}")));
        }
        if weights.iter().chain(&extra_delays).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tap set".into()));
        }
        Ok(Self { weights, delta_t, extra_delays })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn extra_delays(&self) -> &[f64] {
        &self.extra_delays
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()))
    }

    /// Total delay of tap `n`: `n ΔT + extra_delays[n]`.
    pub fn tap_time(&self, n: usize) -> f64 {
        n as f64 * self.delta_t + self.extra_delays[n]
    }

    pub fn replace_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::with_delays(weights, self.delta_t, self.extra_delays.clone())
    }

    pub fn replace_extra_delays(&self, extra_delays: Vec<f64>) -> Result<Self> {
        Self::with_delays(self.weights.clone(), self.delta_t, extra_delays)
    }

    pub fn replace_delta_t(&self, delta_t: f64) -> Result<Self> {
        Self::with_delays(self.weights.clone(), delta_t, self.extra_delays.clone())
    }
}

/// Ideal response at normalized frequency `omega ∈ [-π, π)`.
///
/// The integrator is regularized to `1 / (j · max(|ω|, 2π/m))` with the
/// sign of `ω`, which keeps it finite at DC.
pub fn ideal_response(func: &TargetFunction, omega: f64, m: usize) -> Result<Complex64> {
    if !(-PI..PI).contains(&omega) {
        return Err(Error::param("omega", format!("{omega} outside [-π, π)")));
    }
    match func {
        TargetFunction::Dif => Ok(Complex64::new(0.0, omega)),
        TargetFunction::Ht => Ok(Complex64::new(0.0, if omega >= 0.0 { 1.0 } else { -1.0 })),
        TargetFunction::Int => {
            if m == 0 {
                return Err(Error::param("M", "must be positive"));
            }
            let w_min = 2.0 * PI / m as f64;
            let s = if omega >= 0.0 { 1.0 } else { -1.0 };
            Ok(Complex64::new(0.0, -s / omega.abs().max(w_min)))
        }
        TargetFunction::PhaseEncode(_) => Err(Error::UnsupportedReference),
    }
}

/// Design frequency `2πk/M` wrapped into `[-π, π)`.
pub fn design_frequency(k: usize, m: usize) -> f64 {
    let w = 2.0 * PI * k as f64 / m as f64;
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Frequency-sampling weights for any analytic function, including the
/// regularized integrator.
pub fn frequency_sampling_weights(func: &TargetFunction, m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::param("M", format!("need at least 2 taps, got {m}")));
    }
    let centre = (m as f64 - 1.0) / 2.0;
    let samples = (0..m)
        .map(|k| {
            let w = design_frequency(k, m);
            Ok((w, ideal_response(func, w, m)? * Complex64::from_polar(1.0, -w * centre)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..m)
        .map(|n| {
            let acc: Complex64 = samples.iter().map(|&(w, h)| h * Complex64::from_polar(1.0, w * n as f64)).sum();
            acc.re / m as f64
        })
        .collect())
}

/// Tap weights for `func` with `m` taps on the given link.
///
/// The integrator uses all-ones weights and phase encoding returns its
/// pattern; the other functions are frequency-sampled.
pub fn design_taps(func: &TargetFunction, m: usize, geometry: &LinkGeometry) -> Result<TapSet> {
    geometry.validate()?;
    if m < 2 {
        return Err(Error::param("M", format!("need at least 2 taps, got {m}")));
    }
    func.validate_for(m)?;
    let weights = match func {
        TargetFunction::Int => vec![1.0; m],
        TargetFunction::PhaseEncode(p) => p.iter().map(|&s| f64::from(s)).collect(),
        _ => frequency_sampling_weights(func, m)?,
    };
    TapSet::new(weights, geometry.tap_delay())
}

/// `Σ a_n exp(-jω(nΔT + τ_n))` at RF angular frequency `omega_rf` (rad/s).
pub fn realized_response(taps: &TapSet, omega_rf: f64) -> Complex64 {
    taps.weights.iter().enumerate().map(|(n, &a)| a * Complex64::from_polar(1.0, -omega_rf * taps.tap_time(n))).sum()
}

/// RF periodicity and usable band of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidth {
    /// `1 / ΔT` in Hz.
    pub fsr_mw: f64,
    /// `min(comb spacing / 2, fsr_mw / 2)` in Hz.
    pub usable_band: f64,
    /// Comb spacing converted to Hz.
    pub comb_spacing: f64,
}

pub fn processing_bandwidth(geometry: &LinkGeometry) -> Bandwidth {
    let fsr_mw = 1.0 / geometry.tap_delay();
    let comb_spacing = geometry.comb_spacing_hz();
    Bandwidth { fsr_mw, usable_band: (comb_spacing / 2.0).min(fsr_mw / 2.0), comb_spacing }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo() -> LinkGeometry {
        LinkGeometry::default()
    }

    #[test]
    fn default_link_delay_and_fsr() {
        let g = geo();
        assert!((g.tap_delay() - 33.408e-12).abs() < 1e-18);
        let bw = processing_bandwidth(&g);
        assert!((bw.fsr_mw / 1e9 - 29.93).abs() < 0.005);
        assert!((bw.comb_spacing / 1e9 - 49.91).abs() < 0.01);
        assert!((bw.usable_band - bw.fsr_mw / 2.0).abs() < 1e-3);
        assert!((bw.usable_band / 1e9 - 14.97).abs() < 0.005);
    }

    #[test]
    fn doubling_length_halves_fsr() {
        let g = geo();
        let g2 = LinkGeometry { length_l: 9.6, ..g };
        let ratio = processing_bandwidth(&g).fsr_mw / processing_bandwidth(&g2).fsr_mw;
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn geometry_validation_names_field() {
        let bad = LinkGeometry { d2: 0.0, ..geo() };
        match bad.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "d2"),
            other => panic!("{other:?}"),
        }
        assert!(LinkGeometry { lambda0: 800.0, ..geo() }.validate().is_err());
        assert!(LinkGeometry { length_l: -1.0, ..geo() }.validate().is_err());
    }

    #[test]
    fn ideal_response_examples() {
        assert_eq!(ideal_response(&TargetFunction::Dif, 0.0, 80).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(ideal_response(&TargetFunction::Dif, 1.0, 80).unwrap(), Complex64::new(0.0, 1.0));
        let h = ideal_response(&TargetFunction::Ht, 1.0, 80).unwrap();
        assert_eq!(h.norm(), 1.0);
        assert_eq!(h.arg(), PI / 2.0);
        let i = ideal_response(&TargetFunction::Int, 0.0, 80).unwrap();
        assert!((i.im + 80.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(ideal_response(&TargetFunction::PhaseEncode(vec![1]), 0.0, 1).is_err());
        assert!(ideal_response(&TargetFunction::Dif, PI, 80).is_err());
    }

    #[test]
    fn integrator_is_all_ones() {
        let t = design_taps(&TargetFunction::Int, 80, &geo()).unwrap();
        assert_eq!(t.weights(), &[1.0; 80][..]);
        assert!(t.extra_delays().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn differentiator_has_dc_null_and_odd_symmetry() {
        let t = design_taps(&TargetFunction::Dif, 80, &geo()).unwrap();
        let w = t.weights();
        assert!(w.iter().sum::<f64>().abs() < 1e-10);
        for n in 0..80 {
            assert!((w[n] + w[79 - n]).abs() < 1e-12);
        }
    }

    #[test]
    fn hilbert_matches_inverse_dft_oracle() {
        // Odd M puts a tap exactly on the centre.
        for m in [80usize, 81] {
            let t = design_taps(&TargetFunction::Ht, m, &geo()).unwrap();
            let w = t.weights();
            let c = (m as f64 - 1.0) / 2.0;
            // Closed-form inverse DFT of the sign function with centre delay:
            // h[n] = (1/M) Σ_k s_k sin(-ω_k (n - c)) with s_k = +1 on [0, π), -1 below.
            for (n, &wn) in w.iter().enumerate() {
                let mut acc = 0.0;
                for k in 0..m {
                    let wk = design_frequency(k, m);
                    let s = if wk >= 0.0 { 1.0 } else { -1.0 };
                    acc += -s * (wk * (n as f64 - c)).sin();
                }
                assert!((wn - acc / m as f64).abs() < 1e-12, "m={m} n={n}");
            }
            for n in 0..m {
                assert!((w[n] + w[m - 1 - n]).abs() < 1e-12);
            }
            if m % 2 == 1 {
                assert!(w[m / 2].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn phase_encode_pattern_is_verbatim() {
        let p = vec![1, -1, -1, 1];
        let t = design_taps(&TargetFunction::PhaseEncode(p), 4, &geo()).unwrap();
        assert_eq!(t.weights(), &[1.0, -1.0, -1.0, 1.0]);
        assert!(design_taps(&TargetFunction::PhaseEncode(vec![1, 2]), 2, &geo()).is_err());
        assert!(design_taps(&TargetFunction::PhaseEncode(vec![1]), 2, &geo()).is_err());
    }

    #[test]
    fn realized_response_examples() {
        let ones = TapSet::new(vec![1.0; 12], 1e-11).unwrap();
        let h = realized_response(&ones, 0.0);
        assert_eq!(h, Complex64::new(12.0, 0.0));
        let single = TapSet::new(vec![1.0], 1e-11).unwrap();
        for w in [0.0, 1e9, 3.7e10, -2e11] {
            assert!((realized_response(&single, w).norm() - 1.0).abs() < 1e-15);
        }
        let t = design_taps(&TargetFunction::Ht, 20, &geo()).unwrap();
        let period = 2.0 * PI / t.delta_t();
        for w in [1e9, 5.3e10, -7e10] {
            let d = realized_response(&t, w) - realized_response(&t, w + period);
            assert!(d.norm() < 1e-12 * realized_response(&t, w).norm().max(1.0));
        }
    }

    #[test]
    fn integrator_cross_check_path() {
        let w = frequency_sampling_weights(&TargetFunction::Int, 40).unwrap();
        // 1/(jω) is odd and imaginary, so the sampled response is a centred
        // antisymmetric step with no DC content.
        for n in 0..40 {
            assert!((w[n] + w[39 - n]).abs() < 1e-12);
        }
        assert!(w.iter().sum::<f64>().abs() < 1e-12);
        assert!(w[..20].iter().all(|&x| x < 0.0));
    }

    #[test]
    fn design_is_deterministic() {
        let a = design_taps(&TargetFunction::Ht, 80, &geo()).unwrap();
        let b = design_taps(&TargetFunction::Ht, 80, &geo()).unwrap();
        assert!(a.weights().iter().zip(b.weights()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
