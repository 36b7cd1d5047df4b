use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cpdcast::evaluation::DmLoss;
use cpdcast::ingest::{write_csv, ColumnRoles};
use cpdcast::synthetic::RegimeStream;
use cpdcast_cli::error::{CliError, Stage, StageExt};
use cpdcast_cli::{compare, pipeline, RunConfig};

#[derive(Parser)]
#[command(
    name = "cpdcast",
    version,
    about = "Change-point aware streaming forecasts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its run directory.
    Run { config: PathBuf },
    /// Only detect change points on the reference window.
    Detect { config: PathBuf },
    /// Check a config and its input without running.
    Validate { config: PathBuf },
    /// Diebold-Mariano test between runs (run directories or records.csv).
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        /// Forecast horizon used for the autocovariance truncation.
        #[arg(long)]
        h: usize,
        #[arg(long, value_enum, default_value_t = Loss::Squared)]
        loss: Loss,
        /// Apply the small-sample correction with Student-t p-values.
        #[arg(long)]
        harvey: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic hourly CSV with four annual regime shifts.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        years: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Loss {
    Squared,
    Absolute,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let t0 = Instant::now();
            let out = pipeline::run(&cfg)?;
            let o = &out.report.overall;
            println!(
                "{} [{}]: {} origins ({} evaluated), MAE {:.4}, MSE {:.4}, SMAPE {:.4}",
                out.report.label,
                out.report.schema,
                out.report.instances,
                out.report.included,
                o.mae,
                o.mse,
                o.smape
            );
            println!("wrote {} in {:.1?}", out.output_dir.display(), t0.elapsed());
        }
        Command::Detect { config } => {
            let cfg = RunConfig::load(&config)?;
            let (cps, path) = pipeline::detect(&cfg)?;
            println!(
                "{} change points: {:?}",
                cps.positions().len(),
                cps.positions()
            );
            println!("wrote {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            let series = pipeline::load_series(&cfg)?;
            let layout = cpdcast::ingest::feature_layout(&series, &cfg.features.to_core())
                .stage(Stage::Features)?;
            println!(
                "ok: {} hourly rows from {} to {}, {} features per instance, schema {}",
                series.len(),
                series.timestamps[0],
                series.timestamps[series.len() - 1],
                layout.width(),
                cfg.kind()?
            );
        }
        Command::Compare {
            runs,
            h,
            loss,
            harvey,
            out,
        } => {
            let loss = match loss {
                Loss::Squared => DmLoss::Squared,
                Loss::Absolute => DmLoss::Absolute,
            };
            let rows = compare::compare(&runs, h, loss, harvey)?;
            let csv = compare::to_csv(&rows)?;
            match out {
                Some(p) => fs::write(&p, csv)
                    .map_err(|e| CliError::new(Stage::Output, format!("{}: {e}", p.display())))?,
                None => print!("{}", String::from_utf8_lossy(&csv)),
            }
        }
        Command::Synth { out, years, seed } => {
            let series = RegimeStream::four_shifts(years, seed).generate();
            let file = fs::File::create(&out)
                .map_err(|e| CliError::new(Stage::Output, format!("{}: {e}", out.display())))?;
            write_csv(
                &series,
                &ColumnRoles::new("time", "load"),
                std::io::BufWriter::new(file),
            )
            .stage(Stage::Output)?;
            println!("wrote {} rows to {}", series.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage.exit_code())
        }
    }
}
