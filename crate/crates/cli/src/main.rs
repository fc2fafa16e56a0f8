//! `anchorplay`: run scenarios, compare modes across seeds, audit logs.

mod commands;
mod config;
mod error;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anchorplay_core::sim::Mode;
use clap::{Args, Parser, Subcommand};

use commands::ConfigArgs;
use error::CliError;

const OUT_ENV: &str = "ANCHORPLAY_OUT";

#[derive(Parser)]
#[command(name = "anchorplay", version, about = "Locomotion-gated AR classroom simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML; omitted keys take built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [env: ANCHORPLAY_OUT, default: out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key by dotted path, e.g. motion.speed_mean=1.0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// AnchorPlay or BaselineAlwaysOn
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write events.jsonl, metrics.json, manifest.json.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Re-run exactly from a previous manifest.json.
        #[arg(long, conflicts_with_all = ["config", "set", "mode", "seed"])]
        manifest: Option<PathBuf>,
    },
    /// Run both modes over a seed list and write compare.csv.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Seed list: 7, 1-20, or 1,4,9.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Audit an events.jsonl against its metrics.json.
    TraceCheck {
        events: PathBuf,
        /// Defaults to metrics.json next to the log.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: anchorplay_core::Error| e.to_string())
}

fn default_out() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, seed, manifest } => {
            let args = ConfigArgs { config: common.config, seed, mode: common.mode, set: common.set };
            commands::run(&args, manifest.as_deref(), common.out, default_out())
        }
        Command::Compare { common, seed } => {
            let args = ConfigArgs { config: common.config, seed: None, mode: common.mode, set: common.set };
            commands::compare(&args, seed.as_deref(), common.out.unwrap_or_else(default_out))
        }
        Command::TraceCheck { events, metrics } => commands::trace_check(&events, metrics).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(error::EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
