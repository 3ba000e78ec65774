//! Scenario definitions and the sweep runner.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluate::evaluate;
use super::result::{SweepResult, SweepRow};
use crate::calibration::{calibrate, CalibrationConfig};
use crate::engine::{preset, Preset, ProcessorSpec};
use crate::error::{Error, Result};
use crate::error_models::{ErrorBudget, FloorShape, TodOrigin};
use crate::signal::TargetFunction;

/// Named experiment layouts. Each fixes the swept parameter, its default
/// grid and the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Zero budget, tap count swept.
    #[serde(rename = "FIG3A", alias = "fig3a")]
    Fig3a,
    /// Comb OSNR swept under flat and sinc noise floors.
    #[serde(rename = "FIG4", alias = "fig4")]
    Fig4,
    /// Modulator chirp swept.
    #[serde(rename = "FIG5", alias = "fig5")]
    Fig5,
    /// D2 swept with the tap delay held fixed, so only the RF fade changes.
    #[serde(rename = "FIG6", alias = "fig6")]
    Fig6,
    /// D3 swept with the TOD skew enabled.
    #[serde(rename = "FIG7", alias = "fig7")]
    Fig7,
    /// Shaping error range swept.
    #[serde(rename = "FIG8", alias = "fig8")]
    Fig8,
    /// Error sources enabled one after another.
    #[serde(rename = "FIG9", alias = "fig9")]
    Fig9,
    /// The three preset processors with and without their budgets.
    #[serde(rename = "FIG10", alias = "fig10")]
    Fig10,
    /// Preset 1 before and after feedback calibration.
    #[serde(rename = "FIG12B", alias = "fig12b")]
    Fig12b,
    /// Any spec parameter over any grid.
    #[serde(rename = "CUSTOM", alias = "custom")]
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::Fig3a,
        Scenario::Fig4,
        Scenario::Fig5,
        Scenario::Fig6,
        Scenario::Fig7,
        Scenario::Fig8,
        Scenario::Fig9,
        Scenario::Fig10,
        Scenario::Fig12b,
        Scenario::Custom,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::Fig3a => "FIG3A",
            Scenario::Fig4 => "FIG4",
            Scenario::Fig5 => "FIG5",
            Scenario::Fig6 => "FIG6",
            Scenario::Fig7 => "FIG7",
            Scenario::Fig8 => "FIG8",
            Scenario::Fig9 => "FIG9",
            Scenario::Fig10 => "FIG10",
            Scenario::Fig12b => "FIG12B",
            Scenario::Custom => "CUSTOM",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("scenario", format!("unknown scenario `{s}`")))
    }
}

/// Budget increments of the accumulation scenario. Stage `k` enables the
/// first `k` groups: comb noise (OSNR 30 dB), chirp (α = 0.5), dispersion
/// (RF fade and TOD skew from the geometry's D3), shaping errors (5 %).
pub fn accumulation_budget(stage: usize, seed: u64) -> ErrorBudget {
    let mut b = ErrorBudget { seed, ..ErrorBudget::zero() };
    if stage >= 1 {
        b.osnr_db = Some(30.0);
    }
    if stage >= 2 {
        b.alpha = 0.5;
    }
    if stage >= 3 {
        b.sod_fade = true;
        b.tod_enabled = true;
    }
    if stage >= 4 {
        b.rtce_range = 0.05;
    }
    b
}

/// Highest accumulation stage.
pub const ACCUMULATION_STAGES: usize = 4;

/// Calibration settings used by the before/after scenario.
pub fn scenario_calibration() -> CalibrationConfig {
    CalibrationConfig { phase_correction: true, ..CalibrationConfig::default() }
}

fn default_functions() -> Vec<TargetFunction> {
    TargetFunction::ANALYTIC.to_vec()
}

fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

/// A sweep: base processor, swept parameter, functions and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub base: ProcessorSpec,
    #[serde(default)]
    pub parameter: String,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default = "default_functions")]
    pub functions: Vec<TargetFunction>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// CSV destination. A JSON manifest is written next to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    /// Default layout of `scenario` with 20 seeds and all three functions.
    pub fn for_scenario(scenario: Scenario) -> Self {
        let mut base = ProcessorSpec::default();
        let (parameter, values): (&str, Vec<f64>) = match scenario {
            Scenario::Fig3a => ("taps", vec![20.0, 40.0, 80.0]),
            Scenario::Fig4 => ("osnr_db", vec![10.0, 15.0, 20.0, 25.0, 30.0, 40.0]),
            Scenario::Fig5 => {
                base.budget.sod_fade = true;
                ("alpha", vec![0.0, 0.25, 0.5, 0.75, 1.0])
            }
            Scenario::Fig6 => {
                base.budget.sod_fade = true;
                base.tap_delay = Some(base.geometry.tap_delay());
                ("d2", vec![5.0, 10.0, 15.0, 17.4, 20.0, 25.0, 30.0])
            }
            Scenario::Fig7 => {
                base.budget.tod_enabled = true;
                ("d3", vec![0.0, 0.1, 0.25, 0.5])
            }
            Scenario::Fig8 => ("rtce_range", vec![0.0, 0.02, 0.05, 0.1]),
            Scenario::Fig9 => ("stage", (0..=ACCUMULATION_STAGES).map(|s| s as f64).collect()),
            Scenario::Fig10 => ("processor", vec![1.0, 2.0, 3.0]),
            Scenario::Fig12b => {
                base = preset(Preset::Processor1);
                ("stage", vec![0.0, 1.0])
            }
            Scenario::Custom => ("", Vec::new()),
        };
        Self {
            scenario,
            base,
            parameter: parameter.to_string(),
            values,
            functions: default_functions(),
            seeds: default_seeds(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "need at least one seed"));
        }
        if self.functions.is_empty() {
            return Err(Error::param("functions", "need at least one function"));
        }
        if let Some(f) = self.functions.iter().find(|f| matches!(f, TargetFunction::PhaseEncode(_))) {
            return Err(Error::param("functions", format!("{f} has no analytic reference")));
        }
        if self.values.is_empty() {
            return Err(Error::param("values", "need at least one value"));
        }
        if self.values.iter().any(|v| v.is_nan()) || self.values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("values", "must be sorted ascending"));
        }
        let (expected, integral) = match self.scenario {
            Scenario::Fig9 => (Some("stage"), true),
            Scenario::Fig12b => (Some("stage"), true),
            Scenario::Fig10 => (Some("processor"), true),
            _ => (None, false),
        };
        match expected {
            Some(p) if self.parameter != p => {
                return Err(Error::param(
                    "parameter",
                    format!("{} sweeps `{p}`, not `{}`", self.scenario, self.parameter),
                ));
            }
            Some(_) => {}
            None => {
                let mut probe = self.base.clone();
                set_param(&mut probe, &self.parameter, self.values[0])?;
            }
        }
        if integral && self.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(Error::param("values", "must be non-negative integers"));
        }
        let max = self.values.last().copied().unwrap_or(0.0);
        let limit = match self.scenario {
            Scenario::Fig9 => ACCUMULATION_STAGES as f64,
            Scenario::Fig12b => 1.0,
            Scenario::Fig10 => 3.0,
            _ => f64::INFINITY,
        };
        if max > limit || (self.scenario == Scenario::Fig10 && self.values[0] < 1.0) {
            return Err(Error::param("values", format!("out of range for {}", self.scenario)));
        }
        Ok(())
    }
}

/// Sets a numeric spec parameter by its configuration key.
///
/// Boolean keys treat any nonzero value as true. `floor_shape` takes 0 for
/// FLAT and 1 for SINC, `tod_origin` 0 for FIRST_TAP and 1 for CENTER. An
/// infinite `osnr_db` disables comb noise.
pub fn set_param(spec: &mut ProcessorSpec, name: &str, value: f64) -> Result<()> {
    let b = &mut spec.budget;
    let g = &mut spec.geometry;
    match name {
        "taps" | "M" => {
            if value.fract() != 0.0 || value < 2.0 {
                return Err(Error::param(name, format!("needs an integer ≥ 2, got {value}")));
            }
            spec.m = value as usize;
        }
        "osnr_db" => b.osnr_db = value.is_finite().then_some(value),
        "alpha" => b.alpha = value,
        "rtce_range" => b.rtce_range = value,
        "delay_jitter" => b.delay_jitter = value,
        "seed" => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(Error::param(name, format!("needs a non-negative integer, got {value}")));
            }
            b.seed = value as u64;
        }
        "tod_enabled" => b.tod_enabled = value != 0.0,
        "sod_fade" => b.sod_fade = value != 0.0,
        "floor_shape" => b.floor_shape = if value == 0.0 { FloorShape::Flat } else { FloorShape::Sinc },
        "tod_origin" => b.tod_origin = if value == 0.0 { TodOrigin::FirstTap } else { TodOrigin::Center },
        "delta_lambda" => g.delta_lambda = value,
        "length_L" => g.length_l = value,
        "d2" => g.d2 = value,
        "d3" => g.d3 = value,
        "lambda0" => g.lambda0 = value,
        "tap_delay" => spec.tap_delay = Some(value),
        other => return Err(Error::UnknownParameter(other.to_string())),
    }
    Ok(())
}

/// Applies a `key=value` override given as text. Accepts the numeric keys
/// of [`set_param`] plus symbolic values for `function`, `floor_shape` and
/// `tod_origin`.
pub fn apply_override(spec: &mut ProcessorSpec, key: &str, value: &str) -> Result<()> {
    match key {
        "function" => spec.function = value.parse()?,
        "floor_shape" if value.parse::<f64>().is_err() => {
            spec.budget.floor_shape = serde_json::from_value(serde_json::Value::String(value.to_string()))
                .map_err(|_| Error::param("floor_shape", format!("unknown floor `{value}`")))?;
        }
        "tod_origin" if value.parse::<f64>().is_err() => {
            spec.budget.tod_origin = serde_json::from_value(serde_json::Value::String(value.to_string()))
                .map_err(|_| Error::param("tod_origin", format!("unknown origin `{value}`")))?;
        }
        "tod_enabled" | "sod_fade" if value == "true" || value == "false" => {
            set_param(spec, key, if value == "true" { 1.0 } else { 0.0 })?;
        }
        _ => {
            let v: f64 = value.parse().map_err(|_| Error::param(key, format!("`{value}` is not a number")))?;
            set_param(spec, key, v)?;
        }
    }
    Ok(())
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

struct Job {
    key: Vec<String>,
    spec: ProcessorSpec,
    seed: u64,
}

fn job(key: Vec<String>, mut spec: ProcessorSpec, seed: u64) -> Job {
    spec.budget.seed = seed;
    Job { key, spec, seed }
}

fn run_jobs(columns: Vec<String>, jobs: Vec<Job>) -> Result<SweepResult> {
    let rows = jobs
        .into_par_iter()
        .map(|j| Ok(SweepRow { key: j.key, seed: j.seed, rmse: evaluate(&j.spec)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::new(columns, rows))
}

/// Runs a sweep and, when `cfg.output` is set, writes the CSV and manifest.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let result = match cfg.scenario {
        Scenario::Fig10 => {
            let ids: Vec<Preset> = cfg.values.iter().map(|v| Preset::ALL[*v as usize - 1]).collect();
            fig10(&ids, &cfg.functions, &cfg.seeds)?
        }
        Scenario::Fig12b => fig12b(cfg)?,
        Scenario::Fig4 => {
            let mut jobs = Vec::new();
            for f in &cfg.functions {
                for floor in [FloorShape::Flat, FloorShape::Sinc] {
                    for &v in &cfg.values {
                        for &seed in &cfg.seeds {
                            let mut spec = cfg.base.clone();
                            spec.function = f.clone();
                            spec.budget.floor_shape = floor;
                            set_param(&mut spec, &cfg.parameter, v)?;
                            let key = vec![f.label().into(), fmt_value(v), floor.label().into()];
                            jobs.push(job(key, spec, seed));
                        }
                    }
                }
            }
            let columns = vec!["function".into(), cfg.parameter.clone(), "floor".into()];
            run_jobs(columns, jobs)?
        }
        Scenario::Fig9 => {
            let mut jobs = Vec::new();
            for f in &cfg.functions {
                for &v in &cfg.values {
                    for &seed in &cfg.seeds {
                        let mut spec = cfg.base.clone();
                        spec.function = f.clone();
                        let mut b = accumulation_budget(v as usize, seed);
                        b.floor_shape = spec.budget.floor_shape;
                        b.tod_origin = spec.budget.tod_origin;
                        spec.budget = b;
                        jobs.push(job(vec![f.label().into(), fmt_value(v)], spec, seed));
                    }
                }
            }
            run_jobs(vec!["function".into(), "stage".into()], jobs)?
        }
        _ => {
            let mut jobs = Vec::new();
            for f in &cfg.functions {
                for &v in &cfg.values {
                    for &seed in &cfg.seeds {
                        let mut spec = cfg.base.clone();
                        spec.function = f.clone();
                        set_param(&mut spec, &cfg.parameter, v)?;
                        jobs.push(job(vec![f.label().into(), fmt_value(v)], spec, seed));
                    }
                }
            }
            run_jobs(vec!["function".into(), cfg.parameter.clone()], jobs)?
        }
    };
    if let Some(path) = &cfg.output {
        super::manifest::write_outputs(cfg, &result, path)?;
    }
    Ok(result)
}

fn fig10(ids: &[Preset], functions: &[TargetFunction], seeds: &[u64]) -> Result<SweepResult> {
    let mut jobs = Vec::new();
    for &id in ids {
        for f in functions {
            for (label, with_budget) in [("off", false), ("on", true)] {
                for &seed in seeds {
                    let mut spec = preset(id);
                    spec.function = f.clone();
                    if !with_budget {
                        spec.budget = ErrorBudget::zero();
                    }
                    let key = vec![id.label().into(), f.label().into(), label.into()];
                    jobs.push(job(key, spec, seed));
                }
            }
        }
    }
    run_jobs(vec!["processor".into(), "function".into(), "budget".into()], jobs)
}

/// All three presets, each without (`off`) and with (`on`) its error
/// budget, for every analytic function.
pub fn run_fig10(seeds: &[u64]) -> Result<SweepResult> {
    if seeds.is_empty() {
        return Err(Error::param("seeds", "need at least one seed"));
    }
    fig10(&Preset::ALL, &TargetFunction::ANALYTIC, seeds)
}

fn fig12b(cfg: &SweepConfig) -> Result<SweepResult> {
    let calib = scenario_calibration();
    let pairs: Vec<(TargetFunction, u64)> =
        cfg.functions.iter().flat_map(|f| cfg.seeds.iter().map(move |&s| (f.clone(), s))).collect();
    let evaluated = pairs
        .into_par_iter()
        .map(|(f, seed)| {
            let mut spec = cfg.base.clone();
            spec.function = f.clone();
            spec.budget.seed = seed;
            let pre = evaluate(&spec)?;
            let (corrected, _) = calibrate(&spec, &spec.design()?, &calib)?;
            let post = evaluate(&corrected)?;
            Ok((f, seed, pre, post))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for f in &cfg.functions {
        for &stage in &cfg.values {
            for (g, seed, pre, post) in &evaluated {
                if g == f {
                    let label = if stage == 0.0 { "pre" } else { "post" };
                    rows.push(SweepRow {
                        key: vec![f.label().into(), label.into()],
                        seed: *seed,
                        rmse: if stage == 0.0 { *pre } else { *post },
                    });
                }
            }
        }
    }
    Ok(SweepResult::new(vec!["function".into(), "stage".into()], rows))
}
