use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdyn_cli::{estimate_resources, run, CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "qdyn", version, about = "Run closed and open quantum dynamics experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write series.csv, summary.json and manifest.json.
    Run {
        config: PathBuf,
        /// Worker threads for sweep points (overrides the config).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (overrides the config).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the memory estimate for a config without running it.
    Estimate { config: PathBuf },
    /// List the available experiment kinds.
    ListExperiments,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, threads, output } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            let manifest = run(&cfg)?;
            println!(
                "{}: {:?} in {:.2} s, {} outputs, {} warnings -> {}",
                cfg.experiment.name(),
                manifest.status,
                manifest.wall_time_s,
                manifest.outputs.len(),
                manifest.warnings.len(),
                cfg.output_dir.display()
            );
            for f in &manifest.failures {
                eprintln!("failed: {}", f.error);
            }
            Ok(manifest.exit_code())
        }
        Command::Estimate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let est = estimate_resources(&cfg)?;
            let text = serde_json::to_string_pretty(&serde_json::json!({
                "estimate": est,
                "within_budget": est.within_budget(),
            }))
            .expect("estimate serializes");
            println!("{text}");
            Ok(if est.within_budget() { 0 } else { 3 })
        }
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<14} {}", kind.name(), kind.summary());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
