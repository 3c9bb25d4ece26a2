//! Command-line driver: runs scenario experiments, the builtin verification
//! suite, and scenario listing.
//!
//! Exit codes: 0 pass, 1 check failure, 2 config error, 3 resource guard.

use clap::{Parser, Subcommand};
use ncergo::harness::{self, verify};
use ncergo::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ncergo", version, about = "Ergodic averaging experiments on matrix algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML scenario config.
    Run {
        /// Path to the scenario config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for CSV artifacts and the summary (default: ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the brute-force oracle comparisons.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Run the builtin verification suite.
    Verify {
        /// Which suite to run: all | identities | orlicz | convergence.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Scenario utilities.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Print a freshly computed baseline blob for the builtin scenarios.
    Baseline,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// List the builtin scenarios.
    List,
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::Shape(_) | Error::Domain(_) => ExitCode::from(2),
        Error::Resource(_) => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { config, out, seed, no_oracle } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg = harness::parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = Some(s);
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out"));
            let report = harness::run_experiment(&cfg, &out_dir, no_oracle)?;
            print!("{}", report.summary_text());
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("failed checks:");
                for c in report.failures() {
                    eprintln!("  {} (residual {:.3e}) {}", c.name, c.residual, c.detail);
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify { suite } => {
            let suite = verify::Suite::parse(&suite)?;
            let results = verify::run_suite(suite)?;
            let mut all = true;
            for r in &results {
                println!("{}", r.line());
                all &= r.passed;
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Scenario { command: ScenarioCommand::List } => {
            for (name, cfg) in harness::builtin_scenarios() {
                println!("{name}");
                for line in harness::config_to_toml(&cfg).lines() {
                    println!("  {line}");
                }
                println!();
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Baseline => {
            print!("{}", verify::compute_baseline_blob()?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
