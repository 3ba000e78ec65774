//! `mwpt`: design, simulate, sweep and calibrate comb-based transversal
//! processors from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mwpt_core::calibration::{calibrate, CalibrationConfig};
use mwpt_core::experiments::{aligned_pair, apply_override, manifest_path, standard_input, write_outputs};
use mwpt_core::{evaluate, preset, run_sweep, Preset, ProcessorSpec, Scenario, SweepConfig, TargetFunction};

#[derive(Parser)]
#[command(name = "mwpt", version, about = "Microcomb transversal signal-processor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print designed tap weights, one per line.
    Design(SpecArgs),
    /// Run one processor on the standard Gaussian pulse and report its RMSE.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Write `time,input,output,reference` samples to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario sweep and write CSV plus a JSON manifest.
    Sweep {
        /// Scenario id such as fig4 (overrides the config file).
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Seed count N (seeds 0..N) or a comma-separated seed list.
        #[arg(long)]
        seeds: Option<String>,
        /// CSV destination; raw rows go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sweep configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict the sweep to one function.
        #[arg(long)]
        function: Option<TargetFunction>,
        /// Tap count of the base processor.
        #[arg(long)]
        taps: Option<usize>,
        /// Override a base-processor field, e.g. `--set alpha=0.3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the feedback calibration loop and print the residual per iteration.
    Calibrate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Start from a preset (p1, p2, p3) instead of a config file.
        #[arg(long)]
        preset: Option<Preset>,
        /// Calibration settings JSON.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Also trim per-channel delays.
        #[arg(long)]
        phase_correction: bool,
        /// Write the `iteration,residual` table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the three preset processors as JSON.
    Presets,
}

#[derive(Args)]
struct SpecArgs {
    /// Processor spec JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// hilbert/ht, differentiator/dif or integrator/int.
    #[arg(long)]
    function: Option<TargetFunction>,
    /// Tap count M.
    #[arg(long)]
    taps: Option<usize>,
    /// Override a spec field, e.g. `--set osnr_db=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// Writes `text` to stdout; a closed pipe is reported as [`io::ErrorKind::BrokenPipe`].
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
}

fn apply_overrides(spec: &mut ProcessorSpec, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| anyhow!("override `{o}` is not of the form key=value"))?;
        apply_override(spec, k.trim(), v.trim()).with_context(|| format!("override `{o}`"))?;
    }
    Ok(())
}

impl SpecArgs {
    fn resolve(&self, start: Option<ProcessorSpec>) -> Result<ProcessorSpec> {
        let mut spec = match (&self.config, start) {
            (Some(p), _) => read_json(p)?,
            (None, Some(s)) => s,
            (None, None) => ProcessorSpec::default(),
        };
        if let Some(f) = &self.function {
            spec.function = f.clone();
        }
        if let Some(m) = self.taps {
            spec.m = m;
        }
        apply_overrides(&mut spec, &self.overrides)?;
        spec.validate().context("invalid processor spec")?;
        Ok(spec)
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    if text.contains(',') {
        return text.split(',').map(|s| s.trim().parse::<u64>().with_context(|| format!("bad seed `{s}`"))).collect();
    }
    let n: u64 = text.trim().parse().with_context(|| format!("bad seed count `{text}`"))?;
    if n == 0 {
        bail!("seed count must be at least 1");
    }
    Ok((0..n).collect())
}

fn design(args: &SpecArgs) -> Result<()> {
    let spec = args.resolve(None)?;
    let text: String = spec.design()?.weights().iter().map(|w| format!("{w}\n")).collect();
    emit(&text)
}

fn simulate_cmd(args: &SpecArgs, out: Option<&Path>) -> Result<()> {
    let spec = args.resolve(None)?;
    let rmse = evaluate(&spec)?;
    emit(&format!("function,M,rmse\n{},{},{}\n", spec.function, spec.m, rmse))?;
    if let Some(path) = out {
        let (output, reference) = aligned_pair(&spec)?;
        let input = standard_input();
        let mut text = String::from("time,input,output,reference\n");
        for i in 0..input.len() {
            text.push_str(&format!(
                "{},{},{},{}\n",
                input.time(i),
                input.samples()[i],
                output.samples()[i],
                reference.samples()[i]
            ));
        }
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    scenario: Option<Scenario>,
    seeds: Option<&str>,
    out: Option<&Path>,
    config: Option<&Path>,
    function: Option<&TargetFunction>,
    taps: Option<usize>,
    overrides: &[String],
) -> Result<()> {
    let mut cfg: SweepConfig = match (config, scenario) {
        (Some(p), sc) => {
            let mut c: SweepConfig = read_json(p)?;
            if let Some(sc) = sc {
                c.scenario = sc;
            }
            c
        }
        (None, Some(sc)) => SweepConfig::for_scenario(sc),
        (None, None) => bail!("either --scenario or --config is required"),
    };
    if let Some(s) = seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(f) = function {
        cfg.functions = vec![f.clone()];
    }
    if let Some(m) = taps {
        cfg.base.m = m;
    }
    apply_overrides(&mut cfg.base, overrides)?;
    if let Some(p) = out {
        cfg.output = Some(p.to_path_buf());
    }
    cfg.validate().context("invalid sweep config")?;
    let output = cfg.output.take();
    let result = run_sweep(&cfg)?;
    match output {
        Some(path) => {
            cfg.output = Some(path.clone());
            write_outputs(&cfg, &result, &path)?;
            emit(&result.aggregate_csv()?)?;
            eprintln!("wrote {} rows to {} and {}", result.rows.len(), path.display(), manifest_path(&path).display());
        }
        None => emit(&result.to_csv()?)?,
    }
    Ok(())
}

fn calibrate_cmd(
    args: &SpecArgs,
    start: Option<Preset>,
    calibration: Option<&Path>,
    phase_correction: bool,
    out: Option<&Path>,
) -> Result<()> {
    let spec = args.resolve(start.map(preset))?;
    let mut cfg: CalibrationConfig = match calibration {
        Some(p) => read_json(p)?,
        None => CalibrationConfig::default(),
    };
    cfg.phase_correction |= phase_correction;
    let target = spec.design()?;
    let pre = evaluate(&spec)?;
    let (corrected, report) = calibrate(&spec, &target, &cfg)?;
    let post = evaluate(&corrected)?;
    let table = report.residual_csv();
    match out {
        Some(p) => fs::write(p, &table).with_context(|| format!("cannot write {}", p.display()))?,
        None => emit(&table)?,
    }
    eprintln!(
        "{} after {} iteration(s); rmse {pre} -> {post}",
        if report.converged { "converged" } else { "not converged" },
        report.iterations_used
    );
    Ok(())
}

fn presets() -> Result<()> {
    let rows: Vec<serde_json::Value> = Preset::ALL
        .iter()
        .map(|&id| {
            let spec = preset(id);
            serde_json::json!({
                "id": id.label(),
                "M": spec.m,
                "osnr_db": spec.budget.osnr_db,
                "alpha": spec.budget.alpha,
                "delay_jitter": spec.budget.delay_jitter,
                "rtce_range": spec.budget.rtce_range,
                "delta_lambda": spec.geometry.delta_lambda,
                "tap_delay": spec.delta_t(),
                "spec": spec,
            })
        })
        .collect();
    emit(&(serde_json::to_string_pretty(&rows)? + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(args) => design(&args),
        Command::Simulate { spec, out } => simulate_cmd(&spec, out.as_deref()),
        Command::Sweep { scenario, seeds, out, config, function, taps, overrides } => {
            sweep(scenario, seeds.as_deref(), out.as_deref(), config.as_deref(), function.as_ref(), taps, &overrides)
        }
        Command::Calibrate { spec, preset, calibration, phase_correction, out } => {
            calibrate_cmd(&spec, preset, calibration.as_deref(), phase_correction, out.as_deref())
        }
        Command::Presets => presets(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().filter_map(|c| c.downcast_ref::<io::Error>()).any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}
