use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use idleprobe::report::{cli_diff, cli_probe, EXIT_ERROR};
use idleprobe::simulator::presets;

#[derive(Parser)]
#[command(
    name = "idleprobe",
    version,
    about = "Measure FaaS idle timeouts, keep-alive lifetimes and cold/warm latency"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the campaigns described by a config file
    Probe { config: PathBuf },
    /// Compare reports from several checkpoints of the same target
    Diff {
        #[arg(required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
        /// Also write the diff as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List shipped simulator policies
    Presets {
        /// Print full policies as JSON
        #[arg(long)]
        json: bool,
    },
}

fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var("PROBE_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("PROBE_SEED must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = match cli.command {
        Command::Probe { config } => match seed_from_env() {
            Ok(seed) => cli_probe(&config, seed, &mut out, &mut err),
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                EXIT_ERROR
            }
        },
        Command::Diff { reports, out: json_out } => cli_diff(&reports, json_out.as_deref(), &mut out, &mut err),
        Command::Presets { json } => {
            if json {
                let text = serde_json::to_string_pretty(&presets::all()).expect("presets serialize");
                let _ = writeln!(out, "{text}");
            } else {
                for p in presets::all() {
                    let _ = writeln!(out, "{:<14} idle {}", p.name, p.idle_timeout);
                }
            }
            0
        }
    };
    ExitCode::from(code as u8)
}
