//! Simulation and analysis of comb-based microwave-photonic transversal
//! signal processors.
//!
//! A processor sums delayed, weighted copies of an RF input, one copy per
//! optical comb line. This crate designs tap weights for differentiation,
//! integration and Hilbert transformation, perturbs them with modelled
//! hardware errors, synthesizes the output waveform, scores it against the
//! analytic ideal and runs the feedback loop that trims static errors.
//!
//! ```
//! use mwpt_core::{evaluate, ProcessorSpec, TargetFunction};
//!
//! let spec = ProcessorSpec::new(TargetFunction::Ht, 80);
//! let error = evaluate(&spec).unwrap();
//! assert!(error < 0.05);
//! ```

pub mod calibration;
pub mod engine;
pub mod error;
pub mod error_models;
pub mod experiments;
pub mod signal;
mod spectral;
pub mod taps;

pub use calibration::{calibrate, measure_channel, CalibrationConfig, CalibrationReport, ChannelMeasurement};
pub use engine::{preset, simulate, ChannelCorrections, Preset, ProcessorSpec};
pub use error::{Error, Result};
pub use error_models::{ChannelFilter, ErrorBudget, FloorShape, TodOrigin};
pub use experiments::{evaluate, run_fig10, run_sweep, Scenario, SweepConfig, SweepResult};
pub use signal::{gaussian_pulse, ideal_output, normalize_and_align, rmse, TargetFunction, Waveform};
pub use taps::{design_taps, ideal_response, processing_bandwidth, realized_response, LinkGeometry, TapSet};
