//! Command-line front end: `simulate | pump | sweep | verify`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{cycle_efficiency, sweep_efficiency_power};
use crate::config::{parse_config_with_mode, EngineConfig, Mode};
use crate::cycle::run_engine;
use crate::error::{Error, Result};
use crate::output::{engine_charts, sweep_chart, write_cycles_csv, write_sweep_csv, write_timeseries_csv};
use crate::verify::run_verification;

/// Caps the number of sweep worker threads.
pub const THREADS_ENV: &str = "OTTO_KILN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "otto-kiln", version, about = "Quantum Otto engine simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the four-stroke engine and write timeseries.csv and cycles.csv.
    Simulate(RunArgs),
    /// Run the pumped engine (hot isochore replaced by state preparation).
    Pump(RunArgs),
    /// Efficiency and power over hot temperatures and frequency ratios.
    Sweep(RunArgs),
    /// Run the oracle and invariant suites and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Also render SVG plots (with .dat copies of the plotted data).
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where to store the report as verify.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for symmetry with the other subcommands; verify draws nothing.
    #[arg(long)]
    svg: bool,
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code: 0 on success, 1 on failure, 2 on bad usage.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// `mode` overrides the document's own `mode` key; `verify` passes `None`
/// and audits whatever scenario the document describes.
fn load_config(path: Option<&Path>, mode: Option<Mode>) -> Result<EngineConfig> {
    match path {
        Some(p) => parse_config_with_mode(&fs::read_to_string(p)?, mode),
        None => Ok(EngineConfig {
            mode: mode.unwrap_or(Mode::Verify),
            ..EngineConfig::default()
        }),
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParameter {
                name: "OTTO_KILN_THREADS",
                reason: format!("expected a positive integer, got `{v}`"),
            }),
        },
        _ => Ok(None),
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Simulate(a) => engine(&a, Mode::Otto),
        Command::Pump(a) => engine(&a, Mode::Pump),
        Command::Sweep(a) => sweep(&a),
        Command::Verify(a) => {
            let cfg = load_config(a.config.as_deref(), None)?;
            let report = run_verification(&cfg);
            println!("{report}");
            if let Some(dir) = a.out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("verify.txt"), format!("{report}\n"))?;
            }
            Ok(report.passed())
        }
    }
}

fn engine(args: &RunArgs, mode: Mode) -> Result<bool> {
    let cfg = load_config(args.config.as_deref(), Some(mode))?;
    let trace = run_engine(&cfg)?;
    fs::create_dir_all(&args.out)?;

    let timeseries = args.out.join("timeseries.csv");
    let cycles = args.out.join("cycles.csv");
    write_timeseries_csv(
        &trace,
        Some(cfg.output.csv_levels),
        BufWriter::new(File::create(&timeseries)?),
    )?;
    if cfg.output.wide_csv {
        let full = BufWriter::new(File::create(args.out.join("timeseries_full.csv"))?);
        write_timeseries_csv(&trace, None, full)?;
    }
    write_cycles_csv(&trace.records, BufWriter::new(File::create(&cycles)?))?;
    if args.svg || cfg.output.svg {
        for (stem, chart) in engine_charts(&timeseries, &cycles)? {
            chart.write(&args.out, &stem)?;
        }
    }

    let audit = trace.audit();
    if let Some(last) = trace.records.last() {
        let eta = cycle_efficiency(last).map_or_else(|| "undefined".into(), |e| format!("{e:.9}"));
        println!(
            "{} cycles; last: w_eff = {:.9}, efficiency = {eta}, tv = {:.3e}",
            trace.records.len(),
            last.w_eff,
            last.cyclostationarity()
        );
    }
    for (name, ok, value) in audit.checks() {
        if !ok {
            eprintln!("invariant violated: {name} ({value:.3e})");
        }
    }
    Ok(audit.passed())
}

fn sweep(args: &RunArgs) -> Result<bool> {
    let cfg = load_config(args.config.as_deref(), Some(Mode::Sweep))?;
    let mut settings = cfg.sweep_settings();
    settings.threads = threads_from_env()?;
    let points = sweep_efficiency_power(&settings)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("sweep.csv");
    write_sweep_csv(&points, BufWriter::new(File::create(&path)?))?;
    if args.svg || cfg.output.svg {
        sweep_chart(&path)?.write(&args.out, "sweep")?;
    }
    println!("{} sweep points written to {}", points.len(), path.display());
    Ok(true)
}
