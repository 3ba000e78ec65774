use std::f64::consts::PI;

use mwpt_core::engine::realize;
use mwpt_core::experiments::{median, standard_input};
use mwpt_core::taps::{design_frequency, frequency_sampling_weights};
use mwpt_core::{
    design_taps, gaussian_pulse, ideal_output, ideal_response, realized_response, rmse, simulate, ErrorBudget,
    LinkGeometry, ProcessorSpec, TapSet, TargetFunction, Waveform,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;

const PS: f64 = 1e-12;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn analytic() -> impl Strategy<Value = TargetFunction> {
    prop_oneof![Just(TargetFunction::Dif), Just(TargetFunction::Int), Just(TargetFunction::Ht)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rmse_is_a_symmetric_nonnegative_distance(
        a in prop::collection::vec(-1e3..1e3f64, 2..64),
        shift in -1.0..1.0f64,
    ) {
        let b: Vec<f64> = a.iter().map(|x| x * 0.5 + shift).collect();
        let wa = Waveform::new(0.0, PS, a).unwrap();
        let wb = Waveform::new(0.0, PS, b).unwrap();
        prop_assert_eq!(rmse(&wa, &wa).unwrap(), 0.0);
        prop_assert_eq!(rmse(&wa, &wb).unwrap(), rmse(&wb, &wa).unwrap());
        prop_assert!(rmse(&wa, &wb).unwrap() >= 0.0);
    }

    #[test]
    fn delay_round_trip_is_exact(tau in -200.0e-12..200.0e-12f64) {
        let x = gaussian_pulse(0.17e-9, 0.0, PS, 4096).unwrap();
        let back = x.delayed(tau).delayed(-tau);
        prop_assert!(max_dev(back.samples(), x.samples()) < 1e-12 * x.peak_abs());
    }

    #[test]
    fn frequency_sampling_is_exact_at_design_points(func in analytic(), m in 4usize..96) {
        let delta_t = LinkGeometry::default().tap_delay();
        let taps = TapSet::new(frequency_sampling_weights(&func, m).unwrap(), delta_t).unwrap();
        let centre = (m as f64 - 1.0) / 2.0;
        for k in 0..m {
            let w = design_frequency(k, m);
            let sign_jump = matches!(func, TargetFunction::Ht | TargetFunction::Int) && (k == 0 || 2 * k == m);
            if sign_jump {
                continue;
            }
            let got = realized_response(&taps, w / delta_t);
            let want = ideal_response(&func, w, m).unwrap() * Complex64::from_polar(1.0, -w * centre);
            prop_assert!((got.norm() - want.norm()).abs() <= 1e-9 * want.norm().max(1.0), "k={} {} vs {}", k, got, want);
        }
    }

    #[test]
    fn linearity(a in -3.0..3.0f64, b in -3.0..3.0f64, seed in 0u64..1000) {
        let x1 = gaussian_pulse(0.17e-9, 0.0, PS, 4096).unwrap();
        let x2 = gaussian_pulse(0.3e-9, 0.0, PS, 4096).unwrap().delayed(40e-12);
        let mut spec = ProcessorSpec::new(TargetFunction::Ht, 20);
        spec.budget = ErrorBudget { osnr_db: Some(20.0), alpha: 0.3, rtce_range: 0.05, delay_jitter: 0.05, sod_fade: true, seed, ..ErrorBudget::zero() };
        let mix: Vec<f64> = x1.samples().iter().zip(x2.samples()).map(|(p, q)| a * p + b * q).collect();
        let y = simulate(&x1.with_samples(mix).unwrap(), &spec).unwrap();
        let y1 = simulate(&x1, &spec).unwrap();
        let y2 = simulate(&x2, &spec).unwrap();
        let combo: Vec<f64> = y1.samples().iter().zip(y2.samples()).map(|(p, q)| a * p + b * q).collect();
        let scale = max_abs(&combo).max(1e-300);
        prop_assert!(max_dev(y.samples(), &combo) < 1e-9 * scale);
    }

    #[test]
    fn time_invariance(func in analytic(), k in 1usize..300) {
        let x = gaussian_pulse(0.17e-9, 0.0, PS, 4096).unwrap();
        let spec = ProcessorSpec::new(func, 20);
        let y = simulate(&x, &spec).unwrap();
        let mut shifted = vec![0.0; k];
        shifted.extend_from_slice(&x.samples()[..x.len() - k]);
        let ys = simulate(&x.with_samples(shifted).unwrap(), &spec).unwrap();
        let expect = &y.samples()[..y.len() - k];
        prop_assert!(max_dev(&ys.samples()[k..], expect) < 1e-9 * y.peak_abs());
    }

    #[test]
    fn error_sources_are_isolated(seed in 0u64..10_000) {
        let base = ErrorBudget { seed, ..ErrorBudget::zero() };
        let both = ErrorBudget { rtce_range: 0.05, delay_jitter: 0.04, ..base.clone() };
        let gains_only = ErrorBudget { rtce_range: 0.05, ..base.clone() };
        let delays_only = ErrorBudget { delay_jitter: 0.04, ..base };
        let at = |b: &ErrorBudget| {
            let mut s = ProcessorSpec::new(TargetFunction::Dif, 40);
            s.budget = b.clone();
            realize(&s, 0).unwrap().taps
        };
        let (t_both, t_g, t_d) = (at(&both), at(&gains_only), at(&delays_only));
        prop_assert_eq!(t_both.weights(), t_g.weights());
        prop_assert_eq!(t_both.extra_delays(), t_d.extra_delays());
    }

    #[test]
    fn median_matches_sorted_middle(v in prop::collection::vec(-1e6..1e6f64, 1..50)) {
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let want = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
        prop_assert_eq!(median(&v), want);
    }
}

#[test]
fn differentiate_then_integrate_recovers_input() {
    let x = gaussian_pulse(1e-9, 0.0, PS, 8192).unwrap();
    let d = ideal_output(&TargetFunction::Dif, &x).unwrap();
    let back = ideal_output(&TargetFunction::Int, &d).unwrap();
    let (lo, hi) = x.support(1e-6).unwrap();
    let dev = max_dev(&back.samples()[lo..=hi], &x.samples()[lo..=hi]);
    assert!(dev < 1e-6 * x.peak_abs(), "{dev}");
}

/// Largest `|H(ω) − H_ideal(ω)|` over `ω ∈ [π/4, 3π/4]` with the
/// centre delay removed.
fn mid_band_deviation(func: &TargetFunction, m: usize) -> f64 {
    let geo = LinkGeometry::default();
    let taps = design_taps(func, m, &geo).unwrap();
    let centre = (m as f64 - 1.0) / 2.0;
    (0..=400)
        .map(|i| {
            let w = PI / 4.0 + (PI / 2.0) * i as f64 / 400.0;
            let h = realized_response(&taps, w / geo.tap_delay()) * Complex64::from_polar(1.0, w * centre);
            (h - ideal_response(func, w, m).unwrap()).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn mid_band_deviation_shrinks_with_taps() {
    for func in [TargetFunction::Dif, TargetFunction::Ht] {
        let d: Vec<f64> = [20, 40, 80].iter().map(|&m| mid_band_deviation(&func, m)).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{func}: {d:?}");
    }
}

#[test]
fn tap_symmetry() {
    let geo = LinkGeometry::default();
    for m in [8, 20, 21, 80] {
        let dif = design_taps(&TargetFunction::Dif, m, &geo).unwrap();
        let int = design_taps(&TargetFunction::Int, m, &geo).unwrap();
        let (a, b) = (dif.weights(), int.weights());
        for n in 0..m {
            assert!((a[n] + a[m - 1 - n]).abs() < 1e-12, "DIF m={m} n={n}");
            assert_eq!(b[n], b[m - 1 - n]);
        }
    }
}

#[test]
fn spectrum_ratio_equals_realized_response() {
    let x = standard_input();
    for func in TargetFunction::ANALYTIC {
        let spec = ProcessorSpec::new(func.clone(), 40);
        let taps = spec.design().unwrap();
        let y = simulate(x, &spec).unwrap();
        let n = x.len();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let spectrum = |s: &[f64]| {
            let mut b: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut b);
            b
        };
        let (sx, sy) = (spectrum(x.samples()), spectrum(y.samples()));
        let peak = sx.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let band = 1.0 / (2.0 * taps.delta_t());
        for k in 1..n / 2 {
            let f = k as f64 / (n as f64 * x.dt());
            if f > band || sx[k].norm() < 1e-6 * peak {
                continue;
            }
            let h = realized_response(&taps, 2.0 * PI * f);
            let ratio = sy[k] / sx[k];
            assert!((ratio - h).norm() < 1e-9 * h.norm().max(1.0), "{func} f={f:e}: {ratio} vs {h}");
        }
    }
}

#[test]
fn design_and_simulation_are_deterministic() {
    let geo = LinkGeometry::default();
    let a = design_taps(&TargetFunction::Ht, 80, &geo).unwrap();
    let b = design_taps(&TargetFunction::Ht, 80, &geo).unwrap();
    assert_eq!(a, b);
    let mut spec = ProcessorSpec::new(TargetFunction::Dif, 80);
    spec.budget = ErrorBudget { osnr_db: Some(25.0), rtce_range: 0.05, seed: 11, ..ErrorBudget::zero() };
    let x = standard_input();
    let y1 = simulate(x, &spec).unwrap();
    let y2 = simulate(x, &spec).unwrap();
    assert_eq!(y1.samples(), y2.samples());
    spec.budget.seed = 12;
    assert_ne!(simulate(x, &spec).unwrap().samples(), y1.samples());
}

#[test]
fn zero_budget_is_identity_on_taps() {
    for func in TargetFunction::ANALYTIC {
        let spec = ProcessorSpec::new(func, 80);
        let r = realize(&spec, 0).unwrap();
        assert_eq!(r.taps, spec.design().unwrap());
        assert!(r.filters.is_none());
    }
}
