//! FFT helpers shared by the signal and engine modules.
//!
//! Spectra use the standard DFT bin order: bin `k` sits at `k / (N dt)` for
//! `k <= N/2` and at `(k - N) / (N dt)` above that.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Forward DFT of a real sequence (unnormalized).
pub fn forward(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Inverse DFT scaled by `1/N`, keeping only the real part.
pub fn inverse_real(mut spectrum: Vec<Complex64>) -> Vec<f64> {
    let n = spectrum.len();
    plan(n, true).process(&mut spectrum);
    let scale = 1.0 / n as f64;
    spectrum.into_iter().map(|z| z.re * scale).collect()
}

/// Multiplies a spectrum by `g(f)` for `f >= 0` and by `conj(g(|f|))` on
/// the mirrored bins, so a real input stays real.
///
/// For even lengths the Nyquist bin gets `Re g(f_N)`.
pub fn apply_hermitian<G>(spectrum: &mut [Complex64], dt: f64, mut g: G)
where
    G: FnMut(f64) -> Complex64,
{
    let n = spectrum.len();
    let span = n as f64 * dt;
    let half = n / 2;
    for k in 0..=half {
        let h = g(k as f64 / span);
        if n % 2 == 0 && k == half {
            spectrum[k] *= h.re;
            continue;
        }
        spectrum[k] *= h;
        if k != 0 {
            spectrum[n - k] *= h.conj();
        }
    }
}

/// Delays a uniformly sampled real sequence by `tau` seconds via a linear
/// spectral phase. Negative `tau` advances it. The shift is circular.
pub fn delay(samples: &[f64], dt: f64, tau: f64) -> Vec<f64> {
    if tau == 0.0 {
        return samples.to_vec();
    }
    let mut spec = forward(samples);
    apply_hermitian(&mut spec, dt, |f| Complex64::from_polar(1.0, -2.0 * PI * f * tau));
    inverse_real(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_round_trip() {
        let x: Vec<f64> = (0..37).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        let y = inverse_real(forward(&x));
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_delay_is_a_circular_shift() {
        let x: Vec<f64> = (0..64).map(|i| (-(i as f64 - 20.0).powi(2) / 18.0).exp()).collect();
        let y = delay(&x, 1.0, 5.0);
        for i in 0..64 {
            assert!((y[(i + 5) % 64] - x[i]).abs() < 1e-12, "index {i}");
        }
    }
}
