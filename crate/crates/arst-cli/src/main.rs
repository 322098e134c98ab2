//! `arst` — train and run a streaming phase recognizer on synthetic
//! workflow data.

use std::path::PathBuf;
use std::process::ExitCode;

use arst_cli::{cmd_eval, cmd_gen, cmd_infer, cmd_sweep_w, cmd_train, exit_code, InferOptions};
use arst_core::{ArstError, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "arst",
    version,
    about = "Streaming phase recognition: generate data, train, decode, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset directory.
    Gen {
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a model and write a checkpoint; prints one JSON loss line
    /// per epoch.
    Train {
        /// Dataset directory from `gen`.
        #[arg(long)]
        data: PathBuf,
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint output path.
        #[arg(long = "out-model")]
        out_model: PathBuf,
    },
    /// Decode one feature file into a per-frame prediction CSV.
    Infer {
        /// Checkpoint from `train`.
        #[arg(long)]
        model: PathBuf,
        /// Binary feature file.
        #[arg(long)]
        features: PathBuf,
        /// Confirm phase transitions with lookahead before committing.
        #[arg(long)]
        cci: bool,
        /// Lookahead depth (defaults to the checkpoint's configured value).
        #[arg(long)]
        n: Option<usize>,
        /// Prediction CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Also write a latency report JSON to this path.
        #[arg(long)]
        bench: Option<PathBuf>,
    },
    /// Score predictions against ground-truth labels.
    Eval {
        /// Prediction CSV, or a directory of them.
        #[arg(long)]
        pred: PathBuf,
        /// Label file, or a directory of them matched by stem.
        #[arg(long)]
        gt: PathBuf,
        /// Write the JSON report here as well as to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write a two-row timeline SVG (single-file mode only).
        #[arg(long)]
        ribbon: Option<PathBuf>,
    },
    /// Train and evaluate one model per attention band width.
    SweepW {
        /// Dataset directory from `gen`.
        #[arg(long)]
        data: PathBuf,
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Band widths to sweep, comma-separated.
        #[arg(long = "w-list", value_delimiter = ',', required = true)]
        w_list: Vec<usize>,
    },
}

fn summary_line<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value)
        .map_err(|e| ArstError::Invariant(format!("cannot serialize summary: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { config, out, seed } => {
            let summary = cmd_gen(&config, &out, seed)?;
            println!("{}", summary_line(&summary)?);
        }
        Command::Train {
            data,
            config,
            out_model,
        } => {
            let mut stdout = std::io::stdout().lock();
            let summary = cmd_train(&data, &config, &out_model, &mut stdout)?;
            eprintln!("{}", summary_line(&summary)?);
        }
        Command::Infer {
            model,
            features,
            cci,
            n,
            out,
            bench,
        } => {
            let opts = InferOptions { cci, n, bench };
            let summary = cmd_infer(&model, &features, &opts, &out)?;
            println!("{}", summary_line(&summary)?);
        }
        Command::Eval {
            pred,
            gt,
            report,
            ribbon,
        } => {
            let result = cmd_eval(&pred, &gt, report.as_deref(), ribbon.as_deref())?;
            println!("{}", summary_line(&result)?);
        }
        Command::SweepW {
            data,
            config,
            w_list,
        } => {
            let rows = cmd_sweep_w(&data, &config, &w_list)?;
            print!("{}", arst_cli::render_sweep_table(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
