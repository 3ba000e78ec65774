//! Shared fixtures for the criterion benchmarks.

use mwpt_core::{preset, Preset, ProcessorSpec, TargetFunction};

/// Preset 1 running `function`, with its full error budget.
pub fn loaded_processor(function: TargetFunction) -> ProcessorSpec {
    let mut spec = preset(Preset::Processor1);
    spec.function = function;
    spec
}
