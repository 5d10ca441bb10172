//! `cqednet`: simulate the fiber-coupled cavity QED network, evaluate
//! correlation measures and detect sudden changes and freezing.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cqed_core::analysis::{run_sweep, TransitionReport};
use cqed_core::config::{preset, Propagator, RunConfig, PRESETS};
use cqed_core::correlations::{CorrelationSuite, MeasureSet};
use cqed_core::exec::Exec;
use cqed_core::output::{
    read_series_csv, read_x_states, readout_csv, series_csv, suites_csv, suites_json, BatchFormat, ReportFile,
};
use cqed_core::pipeline::simulate;
use cqed_core::rates::RateMode;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cqednet",
    version,
    about = "Correlation dynamics of two remote qubits in a cavity QED network"
)]
struct Cli {
    /// Worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one end-to-end simulation and write the series CSV and report.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// Series CSV path (default: `<name>.csv` or the config's path).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON report path (default: `<name>.report.json` or the config's path).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the vacuum-conditioned X states to this CSV.
        #[arg(long)]
        states: Option<PathBuf>,
    },
    /// Simulate once per value of a configuration key.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// Dotted configuration key, e.g. `system.nu` or `reservoir.fiber.nbar`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Output JSON path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate correlation measures on a batch of X states.
    Measures {
        /// CSV or JSON rows with columns d1..d4, a14_re, a14_im, a23_re, a23_im.
        input: PathBuf,
        /// Measures to compute (cc,qd,gqd,ree,ge,all).
        #[arg(long, default_value = "all")]
        measures: String,
        #[command(flatten)]
        tolerances: Tolerances,
        /// Write JSON instead of CSV.
        #[arg(long)]
        json: bool,
        /// Output path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run transition detection on an existing series CSV.
    Detect {
        input: PathBuf,
        #[command(flatten)]
        detection: DetectionFlags,
        /// Output JSON path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a flat CSV of change points.
        #[arg(long)]
        changes_csv: Option<PathBuf>,
    },
    /// List or print the figure presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Start from a named preset.
    #[arg(long)]
    preset: Option<String>,
    /// Start from a TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Default)]
struct Tolerances {
    /// CC optimizer tolerance.
    #[arg(long)]
    cc_tolerance: Option<f64>,
    /// Bures GQD optimizer tolerance.
    #[arg(long)]
    gqd_tolerance: Option<f64>,
    /// Random starts for the Bures GQD search.
    #[arg(long)]
    gqd_starts: Option<usize>,
    /// REE/GE duality-gap tolerance.
    #[arg(long)]
    entanglement_tolerance: Option<f64>,
}

#[derive(Args, Default)]
struct DetectionFlags {
    /// Samples per side for the least-squares slopes.
    #[arg(long)]
    window: Option<usize>,
    /// Slope jump required, in multiples of the local median jump.
    #[arg(long)]
    slope_jump_threshold: Option<f64>,
    /// Optimizer-argument jump (rad) that counts as a branch switch.
    #[arg(long)]
    branch_jump: Option<f64>,
    /// Measure value below which branch switches are ignored.
    #[arg(long)]
    branch_value_floor: Option<f64>,
    /// Flatness tolerance for freezing intervals.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Minimum freezing length as a fraction of the simulated span.
    #[arg(long)]
    min_length_fraction: Option<f64>,
}

#[derive(Args)]
struct Overrides {
    /// Rate construction: literal or cascade.
    #[arg(long)]
    mode: Option<RateMode>,
    /// Propagator: secular or rk.
    #[arg(long)]
    propagator: Option<Propagator>,
    /// Measures to compute (cc,qd,gqd,ree,ge,all).
    #[arg(long)]
    measures: Option<String>,
    /// End time in units of 1/gamma.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of evenly spaced samples, including t = 0.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    tolerances: Tolerances,
    #[command(flatten)]
    detection: DetectionFlags,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<cqed_core::Error> for Failure {
    fn from(e: cqed_core::Error) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL };
        Failure { code, error: e.into() }
    }
}

fn config_failure(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        error,
    }
}

impl Tolerances {
    fn apply(&self, opts: &mut cqed_core::correlations::CorrelationOptions) {
        if let Some(t) = self.cc_tolerance {
            opts.cc.tolerance = t;
        }
        if let Some(t) = self.gqd_tolerance {
            opts.gqd.tolerance = t;
        }
        if let Some(n) = self.gqd_starts {
            opts.gqd.starts = n;
        }
        if let Some(t) = self.entanglement_tolerance {
            opts.entanglement.tolerance = t;
        }
    }
}

impl DetectionFlags {
    fn apply(&self, d: &mut cqed_core::analysis::DetectionOptions) {
        if let Some(w) = self.window {
            d.window = w;
        }
        if let Some(v) = self.slope_jump_threshold {
            d.slope_jump_threshold = v;
        }
        if let Some(v) = self.branch_jump {
            d.branch_jump = v;
        }
        if let Some(v) = self.branch_value_floor {
            d.branch_value_floor = v;
        }
        if let Some(v) = self.epsilon {
            d.epsilon = v;
        }
        if let Some(v) = self.min_length_fraction {
            d.min_length_fraction = v;
        }
    }
}

fn load(source: &Source, overrides: &Overrides) -> Result<RunConfig, Failure> {
    let mut cfg = match (&source.preset, &source.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => RunConfig::load(path).map_err(|e| Failure::from(e.at("config")))?,
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(m) = overrides.mode {
        cfg.run.mode = m;
    }
    if let Some(p) = overrides.propagator {
        cfg.run.propagator = p;
    }
    if let Some(list) = &overrides.measures {
        cfg.measures = MeasureSet::parse_list(list)?;
    }
    if let Some(t) = overrides.t_max {
        cfg.time.t_max = t;
    }
    if let Some(n) = overrides.samples {
        cfg.time.samples = n;
    }
    overrides.tolerances.apply(&mut cfg.optimizer);
    overrides.detection.apply(&mut cfg.detection);
    if cfg.name.is_empty() {
        cfg.name = "run".into();
    }
    cfg.validate().map_err(|e| Failure::from(e.at("config")))?;
    Ok(cfg)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(config_failure),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")
            .map_err(config_failure)?;
    }
    #[cfg(not(feature = "parallel"))]
    if cli.workers.is_some() {
        eprintln!("warning: built without the `parallel` feature; --workers is ignored");
    }

    match cli.command {
        Command::Simulate {
            source,
            overrides,
            csv,
            report,
            states,
        } => {
            let cfg = load(&source, &overrides)?;
            let csv = csv
                .or_else(|| cfg.output.csv.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name)));
            let report = report
                .or_else(|| cfg.output.report.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{}.report.json", cfg.name)));
            let out = simulate(&cfg, exec)?;
            if let Some(w) = &out.diagnostics.markov_warning {
                eprintln!("warning: {w}");
            }
            if !out.diagnostics.flagged.is_empty() {
                eprintln!(
                    "warning: {} samples have flagged optimizer certificates (see report)",
                    out.diagnostics.flagged.len()
                );
            }
            write_or_print(Some(&csv), &series_csv(&out))?;
            write_or_print(Some(&report), &ReportFile::from_output(&out).to_json())?;
            if let Some(p) = &states {
                write_or_print(Some(p), &readout_csv(&out.samples))?;
            }
            eprintln!(
                "{}: {} samples, {} sudden changes, {} freezing intervals -> {}, {}",
                cfg.name,
                out.samples.len(),
                out.report.sudden_changes.len(),
                out.report.freezing_intervals.len(),
                csv.display(),
                report.display()
            );
        }
        Command::Sweep {
            source,
            overrides,
            axis,
            values,
            out,
        } => {
            let cfg = load(&source, &overrides)?;
            let points = run_sweep(&cfg, &axis, &values, &cfg.measures, exec)?;
            let failed = points.iter().filter(|p| p.error.is_some()).count();
            let mut text = serde_json::to_string_pretty(&points).expect("sweep serializes");
            text.push('\n');
            write_or_print(out.as_deref(), &text)?;
            if failed > 0 {
                eprintln!("warning: {failed} of {} sweep points failed", points.len());
            }
        }
        Command::Measures {
            input,
            measures,
            tolerances,
            json,
            out,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))
                .map_err(config_failure)?;
            let states = read_x_states(&text, BatchFormat::from_path(&input))?;
            let set = MeasureSet::parse_list(&measures)?;
            let mut opts = cqed_core::correlations::CorrelationOptions::default();
            tolerances.apply(&mut opts);
            let batch: Vec<_> = states.into_iter().map(|s| (s, 1.0)).collect();
            let suites = CorrelationSuite::evaluate_batch(&batch, &set, &opts, exec);
            let text = if json {
                suites_json(&suites)
            } else {
                suites_csv(&suites)
            };
            write_or_print(out.as_deref(), &text)?;
        }
        Command::Detect {
            input,
            detection,
            out,
            changes_csv,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))
                .map_err(config_failure)?;
            let series = read_series_csv(&text)?;
            let mut opts = cqed_core::analysis::DetectionOptions::default();
            detection.apply(&mut opts);
            opts.validate()?;
            let report = TransitionReport::analyze(&series, &opts);
            let hash = text
                .lines()
                .find_map(|l| l.strip_prefix("# config_hash: "))
                .unwrap_or_default()
                .to_string();
            if let Some(p) = changes_csv {
                write_or_print(Some(&p), &report.changes_csv())?;
            }
            let file = ReportFile::new(hash, input.display().to_string(), None, &series, report);
            write_or_print(out.as_deref(), &file.to_json())?;
        }
        Command::Preset { action } => match action {
            PresetAction::List => {
                for name in PRESETS {
                    println!("{name}");
                }
            }
            PresetAction::Show { name } => print!("{}", preset(&name)?.to_toml()),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
