//! Seeded Monte-Carlo sweeps that tabulate RMSE against error parameters.

mod evaluate;
mod manifest;
mod result;
mod sweep;

pub use evaluate::{
    aligned_pair, alignment_delay, capture_window, design_gain, evaluate, standard_input, standard_reference,
    CAPTURE_HALF_WIDTH, PULSE_FWHM, STANDARD_DT, STANDARD_SAMPLES,
};
pub use manifest::{config_hash, manifest_path, write_outputs, RunManifest};
pub use result::{median, Aggregate, SweepResult, SweepRow};
pub use sweep::{
    accumulation_budget, apply_override, run_fig10, run_sweep, scenario_calibration, set_param, Scenario, SweepConfig,
    ACCUMULATION_STAGES,
};
