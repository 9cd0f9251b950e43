//! `conestab`: threshold tables, variation reports, stability sweeps, the
//! two-dimensional instability witness and the invariant suites.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome, Status};
use config::{Format, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "conestab", version, about = "Stability of flat free-boundary slices in circular cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kato constants and threshold apertures for a range of dimensions.
    Threshold {
        /// First dimension of the table.
        #[arg(long, default_value_t = 3)]
        from: usize,
        /// Last dimension of the table (an empty table when below `--from`).
        #[arg(long, default_value_t = 12)]
        to: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form and finite-difference second variations for configured fields.
    Variation(Common),
    /// Stability margins over a battery of fields (n ≥ 3).
    Sweep(Common),
    /// Log-divergence certificate of the two-dimensional instability.
    #[command(name = "witness-n2")]
    WitnessN2(Common),
    /// Randomized invariant suites.
    Verify(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "epsilon-cutoff")]
    epsilon_cutoff: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            n: self.n,
            lambda: self.lambda,
            t0: self.t0,
            levels: self.levels,
            seed: self.seed,
            format: self.format,
            out: self.out.clone(),
            epsilon_cutoff: self.epsilon_cutoff,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn run(command: &Command) -> (Option<RunConfig>, Result<Outcome, CliError>) {
    let common = match command {
        Command::Threshold { common, .. }
        | Command::Variation(common)
        | Command::Sweep(common)
        | Command::WitnessN2(common)
        | Command::Verify(common) => common,
    };
    let cfg = match common.resolve() {
        Ok(c) => c,
        Err(e) => return (None, Err(e)),
    };
    let outcome = match command {
        Command::Threshold { from, to, .. } => {
            let (from, to) = cfg.n.map_or((*from, *to), |n| (n, n));
            commands::threshold(from, to, &cfg)
        }
        Command::Variation(_) => commands::variation(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::WitnessN2(_) => commands::witness_n2(&cfg),
        Command::Verify(_) => commands::verify(&cfg),
    };
    (Some(cfg), outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, outcome) = run(&cli.command);
    let out = cfg.as_ref().and_then(|c| c.out.clone());
    match outcome {
        Ok(outcome) => {
            let format = cfg.as_ref().map_or(Format::Json, RunConfig::format);
            let text = match format {
                Format::Json => report::to_json(&outcome.report),
                Format::Csv => report::to_csv(&outcome.report.table),
            };
            if let Err(e) = write_output(out.as_ref(), &text) {
                eprintln!("conestab: cannot write output: {e}");
                return ExitCode::from(Status::InvalidConfig.code());
            }
            if matches!(cli.command, Command::Verify(_)) && outcome.status == Status::InvariantFailure {
                eprintln!("conestab: failing suites: {}", commands::failing_suites(&outcome.report).join(", "));
            }
            ExitCode::from(outcome.status.code())
        }
        Err(e) => {
            eprintln!("conestab: {}", e.message);
            let _ = write_output(out.as_ref(), &e.to_json());
            ExitCode::from(e.status.code())
        }
    }
}
