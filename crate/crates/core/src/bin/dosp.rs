use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dosp::experiment::{list_experiments, resolve, run_experiment, RunOptions, Status};

#[derive(Parser)]
#[command(name = "dosp", version, about = "Run and validate perturbation-based distributed optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in experiment or a configuration file.
    Run {
        /// Built-in name (see `list`) or path to a configuration file.
        experiment: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Exit nonzero if a hard assertion fails.
        #[arg(long)]
        check: bool,
        /// Output directory (default: out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        allow_invalid_schedule: bool,
        /// Override the replication count of every run.
        #[arg(long)]
        replications: Option<usize>,
        /// Override the horizon of every run.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Parse a configuration and check its schedules.
    Validate {
        /// Built-in name or path to a configuration file.
        path: String,
        #[arg(long)]
        allow_invalid_schedule: bool,
    },
    /// List the built-in experiments.
    List,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> dosp::Result<ExitCode> {
    match cli.command {
        Command::List => {
            for name in list_experiments() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            path,
            allow_invalid_schedule,
        } => {
            let spec = resolve(&path)?;
            let report = spec.validate(allow_invalid_schedule)?;
            println!("{}: {:?}, objective {}, {} run(s)", report.name, spec.kind, spec.objective.kind_name(), report.runs.len());
            for r in &report.runs {
                let state = match (r.a4.is_valid(), r.allowed) {
                    (true, _) => "ok".to_string(),
                    (false, _) => format!("waived: {}", r.a4.failures().join("; ")),
                };
                println!("  {}: {state}", r.label);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            experiment,
            seed,
            jobs,
            check,
            out,
            allow_invalid_schedule,
            replications,
            horizon,
        } => {
            let spec = resolve(&experiment)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out").join(&spec.name));
            let options = RunOptions {
                out_dir: Some(out_dir.clone()),
                jobs,
                seed,
                replications,
                horizon,
                allow_invalid_schedule,
            };
            let summary = run_experiment(&spec, &options)?;
            for a in &summary.assertions {
                let status = match a.status {
                    Status::Pass => "PASS",
                    Status::Fail if a.hard => "FAIL",
                    Status::Fail => "fail (soft)",
                };
                println!("{status:11} {}  measured {:.6e} bound {:.6e} tolerance {:.3e}", a.id, a.measured, a.bound, a.tolerance);
            }
            println!("wrote {} file(s) to {}", summary.files.len(), out_dir.display());
            Ok(if check && !summary.passed() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}
