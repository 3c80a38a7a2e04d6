//! Argument parsing and the exit-code mapping, kept out of `main` so tests
//! can drive the real entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::config::{load_config, Experiment};
use crate::error::CliError;
use crate::presets::{run_experiment, ExperimentPreset, RunOptions};

/// Tag-based encoding secrecy simulator for a UAV massive-MIMO downlink.
#[derive(Debug, Parser)]
#[command(name = "tbe-sim", version)]
pub struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    pub preset: ExperimentPreset,
    /// TOML file overriding the default parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed for the Monte Carlo streams.
    #[arg(long, default_value_t = 0x7BE5EC)]
    pub seed: u64,
    /// Monte Carlo blocks per operating point.
    #[arg(long, default_value_t = 20_000)]
    pub trials: u64,
    /// Directory for the CSV output.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exit with status 4 when fewer than 95% of theory/simulation cells
    /// agree within 3 standard errors.
    #[arg(long)]
    pub strict: bool,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let exp = match &args.config {
        Some(path) => load_config(path)?,
        None => Experiment::default(),
    };
    let opts = RunOptions { seed: args.seed, trials: args.trials, out_dir: args.out.clone(), threads: args.threads };
    let summary = run_experiment(args.preset, &exp, &opts)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    if let Some(msg) = summary.infeasible {
        return Err(CliError::Infeasible(msg));
    }
    if args.strict && summary.pass_rate() < 0.95 {
        return Err(CliError::Acceptance(format!(
            "{} of {} cells within 3 standard errors",
            summary.checks_passed, summary.checks_total
        )));
    }
    Ok(())
}

/// Parse `argv`, run, and return the process exit status. Usage errors
/// count as configuration errors.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tbe-sim: {e}");
            e.exit_code()
        }
    }
}
