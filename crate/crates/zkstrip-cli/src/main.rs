//! `zkstrip` command line: run, gate-check and verify simulations of the
//! critical Zakharov-Kuznetsov equation on a truncated half-strip.
//!
//! Exit codes: 0 success, 1 configuration or gate failure, 2 numerical
//! blow-up.

// `!(x > 0.0)` guards reject NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{EXIT_CONFIG, EXIT_OK};

#[derive(Parser, Debug)]
#[command(name = "zkstrip", version, about = "Zakharov-Kuznetsov half-strip simulator")]
struct Cli {
    /// Output directory for CSV series, summaries and manifests.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for randomized verification.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads (used by verify-inequalities; the time steppers
    /// are sequential in t and unaffected).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Override the configured observer stride.
    #[arg(long, global = true)]
    stride: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evolve the configured experiment, writing the energy-report time
    /// series, a summary and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the smallness and decay gates on the configured initial
    /// data and print the report as JSON.
    CheckData {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the Steklov, interpolation and sup-bound inequalities on
    /// randomized smooth fields.
    VerifyInequalities {
        /// Number of random fields.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Optional config supplying the verification grid.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the decay experiment and fit the exponential rates.
    FitDecay {
        #[arg(long)]
        config: PathBuf,
    },
    /// Galerkin convergence across nested mode counts.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated increasing mode counts, e.g. 8,16,32.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<usize>,
    },
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    // usage errors must exit 1, not clap's default 2 (2 means blow-up)
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are successful output
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return EXIT_CONFIG;
    }

    match cli.cmd {
        Cmd::Run { config } => match config::load(&config) {
            Ok(cfg) => commands::cmd_run(cfg, &cli.out, cli.seed, cli.threads, cli.stride),
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_CONFIG
            }
        },
        Cmd::CheckData { config } => match config::load(&config) {
            Ok(cfg) => commands::cmd_check_data(cfg),
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_CONFIG
            }
        },
        Cmd::VerifyInequalities { trials, config } => {
            let grid_cfg = match config {
                Some(path) => match config::load(&path) {
                    Ok(cfg) => Some(cfg),
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        return EXIT_CONFIG;
                    }
                },
                None => None,
            };
            commands::cmd_verify_inequalities(grid_cfg, cli.seed, trials, cli.threads)
        }
        Cmd::FitDecay { config } => match config::load(&config) {
            Ok(cfg) => commands::cmd_fit_decay(cfg, &cli.out, cli.seed, cli.threads),
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_CONFIG
            }
        },
        Cmd::Converge { config, modes } => match config::load(&config) {
            Ok(cfg) => commands::cmd_converge(cfg, &modes, &cli.out, cli.seed, cli.threads),
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_CONFIG
            }
        },
    }
}
