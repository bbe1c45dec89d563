use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rwalks::config::parse_config;
use rwalks::experiments::{kinds, write_experiment, RunOptions};
use rwalks::verify::{run_suite, Suite};
use rwalks_core::ensemble::Execution;

#[derive(Parser)]
#[command(name = "rwalks", version, about = "Reinforced random walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its CSV.
    Run {
        config: PathBuf,
        /// Use the config's full_steps / full_replicates.
        #[arg(long)]
        full: bool,
        /// Worker threads; 1 runs sequentially. Defaults to all cores.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides RWALKS_SEED and the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification suite: exact, numeric, statistical or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// List the experiment kinds.
    ListKinds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, full, workers, out, seed } => {
            let result = (|| {
                let text =
                    std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
                let cfg = parse_config(&text).with_context(|| format!("invalid config {}", config.display()))?;
                let env = std::env::var(rwalks::SEED_ENV).ok();
                let seed = rwalks::resolve_seed(seed, env.as_deref()).map_err(anyhow::Error::msg)?;
                let opts = RunOptions { full, exec: Execution::with_workers(workers), seed };
                write_experiment(&cfg, &opts, &out)
            })();
            match result {
                Ok(path) => {
                    println!("{}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Verify { suite, seed } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let checks = run_suite(suite, seed);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} passed, {failed} failed", checks.len() - failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::ListKinds => {
            for (name, about) in kinds() {
                println!("{name:<20} {about}");
            }
            ExitCode::SUCCESS
        }
    }
}
