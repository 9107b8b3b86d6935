//! Seeded, parallel execution of an experiment grid.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EstimatorSpec, ExperimentConfig, GridPoint};
use crate::error::{Error, Result};
use crate::linalg;
use crate::measurement::{acquire, sample_paulis, Shots};
use crate::metrics::{fidelity, mse, rel_l2_error};
use crate::noise::NoiseSpec;
use crate::qstate::StateKind;
use crate::solvers::{solve_constrained, solve_matrix_lasso, solve_penalized, solve_regularized, ReconstructionResult};

/// One reconstruction: a run at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub run_index: usize,
    pub n: usize,
    pub rank: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub shots: Shots,
    pub eta: f64,
    pub noise_kind: String,
    pub sigma_or_lambda: f64,
    pub estimator: String,
    pub fidelity: f64,
    pub mse: f64,
    pub rel_l2: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate_flag: bool,
    pub wall_time_seconds: f64,
    pub seed: u64,
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Stream {
    State = 1,
    Plan = 2,
    Noise = 3,
    ExtraNoise = 4,
    Shots = 5,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Sub-seed from the master seed and a path of indices. Depends only on the
/// values, never on scheduling.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |h, &p| splitmix(h ^ splitmix(p)))
}

fn stream(seed: u64, which: Stream, path: &[u64]) -> ChaCha8Rng {
    let mut full = Vec::with_capacity(path.len() + 1);
    full.push(which as u64);
    full.extend_from_slice(path);
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &full))
}

/// Sparsity ratio to report: the swept value, the `c` in `floor(c*m)`, or `s/m`.
fn eta_label(point: &GridPoint, s: usize) -> f64 {
    if let Some(eta) = point.variant.eta {
        return eta;
    }
    match &point.variant.noise {
        NoiseSpec::None => 0.0,
        NoiseSpec::ScaledGaussianBall { .. } => 1.0,
        NoiseSpec::SparseGaussian { sparsity, .. }
        | NoiseSpec::SparsePoisson { sparsity, .. }
        | NoiseSpec::BoundedSparse { sparsity, .. } => sparsity
            .source()
            .strip_prefix("floor(")
            .and_then(|r| r.strip_suffix("*m)"))
            .and_then(|c| c.parse().ok())
            .unwrap_or(s as f64 / point.m as f64),
    }
}

fn solve(estimator: &EstimatorSpec, record: &crate::measurement::MeasurementRecord, config: &ExperimentConfig) -> Result<ReconstructionResult> {
    let m = record.m();
    let opts = &config.solver;
    match estimator {
        EstimatorSpec::Regularized { tau1, tau2 } => solve_regularized(record, tau1.eval(m), tau2.eval(m), opts),
        EstimatorSpec::Constrained { beta, delta } => {
            solve_constrained(record, beta * linalg::l1_norm(&record.v_true), *delta, opts)
        }
        EstimatorSpec::Penalized { lambda1, lambda2, delta } => {
            solve_penalized(record, lambda1.eval(m), lambda2.eval(m), *delta, opts)
        }
        EstimatorSpec::MatrixLasso { mu } => solve_matrix_lasso(record, mu.eval(m), opts),
    }
}

/// Runs one (run, grid point) task. Every random draw comes from a stream
/// keyed by the task coordinates, so the same state, plan and corruption are
/// shared by all variants that only differ in shots, noise level or estimator.
pub fn run_task(config: &ExperimentConfig, point: &GridPoint, run: usize) -> Result<ResultRow> {
    let start = Instant::now();
    let v = &point.variant;
    let (run64, n64, m64) = (run as u64, v.n as u64, point.m as u64);
    let rank = match v.state.kind {
        StateKind::RankR => v.state.rank,
        _ => 1,
    };

    let rho = v
        .state
        .sample(v.n, &mut stream(config.seed, Stream::State, &[run64, n64, rank as u64]))?;
    let plan = sample_paulis(v.n, point.m, &mut stream(config.seed, Stream::Plan, &[run64, n64, m64]))?;
    let noise = v
        .noise
        .generate(point.m, &mut stream(config.seed, Stream::Noise, &[run64, n64, m64]))?;
    let z = match &config.z_spec {
        Some(spec) => Some(
            spec.generate(point.m, &mut stream(config.seed, Stream::ExtraNoise, &[run64, n64, m64]))?
                .values,
        ),
        None => None,
    };
    let mut shot_rng = stream(config.seed, Stream::Shots, &[run64, v.index as u64, m64]);
    let record = acquire(&plan, &rho, v.shots, &noise.values, z.as_deref(), &mut shot_rng)?;

    let result = solve(&v.estimator, &record, config)?;
    let fid = fidelity(&rho, &result.rho_hat)?;
    Ok(ResultRow {
        experiment_id: config.experiment_id.clone(),
        run_index: run,
        n: v.n,
        rank,
        m: point.m,
        shots: v.shots,
        eta: eta_label(point, noise.support.len()),
        noise_kind: v.noise.kind().name().to_string(),
        sigma_or_lambda: v.noise.level(),
        estimator: v.estimator.name().to_string(),
        fidelity: fid,
        mse: mse(&record.v_true, &result.v_hat)?,
        rel_l2: rel_l2_error(&record.v_true, &result.v_hat)?,
        iterations: result.iterations,
        converged: result.converged,
        degenerate_flag: result.degenerate,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}

/// Validates, then runs every task. Rows come back ordered by
/// (variant, m, run) whatever the worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let grid = config.grid();
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..config.runs).map(move |r| (g, r)))
        .collect();
    let work = || -> Result<Vec<ResultRow>> {
        tasks
            .par_iter()
            .map(|&(g, r)| run_task(config, &grid[g], r))
            .collect()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = config.parallelism {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(work)
}
