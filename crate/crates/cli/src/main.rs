// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infodyn_cli::{run, validate, ExperimentKind, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "infodyn", version, about = "Run information-dynamics experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config and write `<out>/<kind>.csv` and `<out>/summary.json`.
    Run {
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: `[output] dir`, then `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Check a config and list every violation.
    Validate { config: PathBuf },
    /// Print the experiment kinds and their CSV columns.
    ListKinds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            let opts = RunOptions {
                seed,
                out_dir: out,
                threads,
            };
            match run(&config, &opts) {
                Ok(report) => {
                    println!("wrote {}", report.csv.display());
                    println!("wrote {}", report.summary.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(source) => {
                    return fail(&RunError::Io {
                        context: format!("reading {}", config.display()),
                        source,
                    })
                }
            };
            match validate(&text) {
                Ok(cfg) => {
                    println!("ok: {} experiment", cfg.kind);
                    ExitCode::SUCCESS
                }
                Err(vs) => fail(&RunError::Validation(vs)),
            }
        }
        Command::ListKinds => {
            for kind in ExperimentKind::ALL {
                println!("{:<13} {}", kind.name(), kind.columns().join(","));
            }
            ExitCode::SUCCESS
        }
    }
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
