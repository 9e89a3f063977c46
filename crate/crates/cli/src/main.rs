use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bayesbench::{render_plot, run_experiment, CliError, ExperimentName, Overrides, PlotKind};

#[derive(Parser)]
#[command(name = "bayesbench", version, about = "Seeded Bayesian computation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment.
    Run {
        name: ExperimentName,
        /// JSON config file (a run manifest is also accepted).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        replicates: Option<usize>,
        /// Worker threads; falls back to BAYESBENCH_THREADS, then all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Render a CSV as an SVG plot.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
    },
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("BAYESBENCH_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("BAYESBENCH_THREADS must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { name, config, seed, out, replicates, threads } => {
            let threads = match threads.map(Some).map_or_else(threads_from_env, Ok) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            if threads == Some(0) {
                eprintln!("error: config error: thread count must be at least 1");
                return ExitCode::from(2);
            }
            run_experiment(name, config.as_deref(), &Overrides { seed, replicates }, &out, threads).map(|m| {
                println!("{} finished in {:.2}s: {} files in {}", name, m.duration_seconds, m.files.len() + 1, out.display());
            })
        }
        Command::Plot { csv, kind, out } => render_plot(&csv, kind, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
