//! Config-driven experiment runner.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

use std::fs;
use std::path::Path;

use serde::Serialize;

pub use config::{EstimatorSpec, ExperimentConfig, GridPoint, MGrid, SweepAxis, Variant};
pub use output::{aggregate, read_aggregates, read_results, write_aggregates, write_results, AggregateRow};
pub use presets::{preset, DEFAULT_SEED, PRESETS};
pub use runner::{derive_seed, run_experiment, ResultRow};

use crate::error::{Error, Result};

#[derive(Serialize)]
struct RunMeta<'a> {
    artifact: &'static str,
    version: &'static str,
    seed: u64,
    rows: usize,
    failures: usize,
    wall_time_seconds: f64,
    config: &'a ExperimentConfig,
}

/// Runs `config` and writes `results.csv`, `aggregate.csv` and
/// `run_meta.json` into `dir`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<Vec<AggregateRow>> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let start = std::time::Instant::now();
    let rows = run_experiment(config)?;
    let aggs = aggregate(&rows);
    write_results(&rows, &dir.join("results.csv"))?;
    write_aggregates(&aggs, &dir.join("aggregate.csv"))?;
    let meta = RunMeta {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        rows: rows.len(),
        failures: rows.iter().filter(|r| !r.converged).count(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config,
    };
    let path = dir.join("run_meta.json");
    fs::write(&path, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&path, e))?;
    Ok(aggs)
}
