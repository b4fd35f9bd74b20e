use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stackfuse_cli::commands::{self, Output, MODEL_DIR};
use stackfuse_cli::{CliError, ExperimentConfig};

/// Two-stage MLP classification with class-score fusion.
#[derive(Parser)]
#[command(name = "stackfuse", version)]
struct Cli {
    /// Experiment config (flat key = value file).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "stackfuse-out")]
    out: PathBuf,
    /// Root seed; overrides `seed` in the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the split plan(s) for the configured protocol.
    Split,
    /// Train both stages on one split and save the model.
    Train,
    /// Evaluate a saved model on its held-out set.
    Eval {
        /// Model directory; defaults to `<out>/model`.
        #[arg(long, value_name = "DIR")]
        model: Option<PathBuf>,
        /// Evaluate on every sample instead of the recorded D3.
        #[arg(long)]
        all: bool,
    },
    /// Leave-one-person-out comparison of stage 1 and stage 2.
    Lopo,
    /// Repeated fraction-split runs (40/40/20 by default).
    Mnist,
    /// Write the configured synthetic corpus as CSV.
    Synth,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::config("no config given (use --config <path>)"))?;
    let cfg = ExperimentConfig::load(&path, cli.seed)?;
    let out = Output { dir: cli.out, quiet: cli.quiet };
    match cli.command {
        Command::Split => commands::cmd_split(cfg, &out),
        Command::Train => commands::cmd_train(cfg, &out),
        Command::Eval { model, all } => {
            let model = model.unwrap_or_else(|| out.dir.join(MODEL_DIR));
            commands::cmd_eval(cfg, &model, all, &out)
        }
        Command::Lopo => commands::cmd_lopo(cfg, &out),
        Command::Mnist => commands::cmd_mnist(cfg, &out),
        Command::Synth => commands::cmd_synth(cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stackfuse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
