use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use weqsim::sweeps::{run, Command, RunOptions};
use weqsim::{ConfigError, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICS: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_IO: u8 = 1;

/// Free-fall wave-packet scenarios written as CSV.
#[derive(Parser, Debug)]
#[command(name = "weqsim", version)]
struct Cli {
    /// density, width-sweep, prob-sweep, tau-sweep, tables, trajectories,
    /// wigner or peak-track
    command: Command,
    /// Configuration file applied on top of the command's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set mass=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Compare the tables with their reference values.
    #[arg(long)]
    verify: bool,
    /// Leave the timestamp out of the provenance block.
    #[arg(long)]
    no_timestamp: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICS,
    }
}

fn configure(cli: &Cli) -> Result<weqsim::ExperimentConfig, ConfigError> {
    let mut cfg = cli.command.preset();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::invalid("config", format!("{}: {e}", path.display())))?;
        cfg = cfg.merged(&text)?;
    }
    for item in &cli.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: format!("--set {item}") })?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("weqsim: configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let opts = RunOptions { verify: cli.verify, timestamp: !cli.no_timestamp, jobs: cli.jobs.map(usize::from) };
    let report = match run(cli.command, &cfg, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("weqsim: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = report.render();
    let written = match &cli.out {
        Some(path) => fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("weqsim: cannot write output: {e}");
        return ExitCode::from(EXIT_IO);
    }
    if let Some(v) = &report.verification {
        if !v.passed() {
            for line in v.report() {
                eprintln!("{line}");
            }
            return ExitCode::from(EXIT_VERIFY);
        }
    }
    ExitCode::SUCCESS
}
