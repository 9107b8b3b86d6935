use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use csqst::harness::{self, aggregate, read_results, write_aggregates, ExperimentConfig, PRESETS};
use csqst::Error;

#[derive(Parser)]
#[command(name = "csqst", version, about = "Corrupted-sensing state tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named preset; the resolved config is written next to the results.
    Preset {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Override the preset's run count.
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write config.json without running.
        #[arg(long)]
        dry_run: bool,
    },
    /// Aggregate a results.csv into per-grid-point statistics.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    ListPresets,
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Config(_) | Error::UnknownPreset { .. } | Error::Json(_) => Failure::Config(e),
        _ => Failure::Runtime(e),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::read(&config).map_err(|e| match e {
                Error::Io { .. } => Failure::Config(e),
                other => classify(other),
            })?;
            report(&cfg, harness::run_to_dir(&cfg, &out).map_err(classify)?.len(), &out);
        }
        Command::Preset {
            name,
            out,
            runs,
            seed,
            dry_run,
        } => {
            let mut cfg = harness::preset(&name).map_err(classify)?;
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(classify)?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::Runtime(Error::io(&out, e)))?;
            cfg.write(&out.join("config.json")).map_err(Failure::Runtime)?;
            if !dry_run {
                report(&cfg, harness::run_to_dir(&cfg, &out).map_err(classify)?.len(), &out);
            }
        }
        Command::Aggregate { input, out } => {
            let rows = read_results(&input).map_err(classify)?;
            let aggs = aggregate(&rows);
            write_aggregates(&aggs, &out).map_err(Failure::Runtime)?;
            eprintln!("{} rows -> {} grid points", rows.len(), aggs.len());
        }
        Command::ListPresets => {
            let mut out = std::io::stdout().lock();
            for p in PRESETS {
                if writeln!(out, "{p}").is_err() {
                    break;
                }
            }
        }
    }
    Ok(())
}

fn report(cfg: &ExperimentConfig, points: usize, out: &std::path::Path) {
    eprintln!(
        "{}: {} rows over {points} grid points written to {}",
        cfg.experiment_id,
        cfg.num_rows(),
        out.display()
    );
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
