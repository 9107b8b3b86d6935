//! Named configurations for the figure reproductions.

use super::config::{EstimatorSpec, ExperimentConfig, MGrid, SweepAxis};
use crate::error::{Error, Result};
use crate::measurement::Shots;
use crate::noise::NoiseSpec;
use crate::qstate::StateFamily;
use crate::solvers::SolverOptions;

pub const DEFAULT_SEED: u64 = 20_240_611;

pub const PRESETS: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "fig5a", "fig5b", "fig6a", "fig6b", "figA", "figB", "figW",
    "figN", "figE", "figF", "figG",
];

const SPARSITY: &str = "floor(0.04*m)";

fn gaussian(sigma: f64) -> NoiseSpec {
    NoiseSpec::sparse_gaussian(SPARSITY, sigma).expect("preset rule")
}

fn poisson(lambda: f64) -> NoiseSpec {
    NoiseSpec::sparse_poisson(SPARSITY, lambda).expect("preset rule")
}

fn bounded(eta: &str, delta0: f64) -> NoiseSpec {
    NoiseSpec::bounded_sparse(&format!("floor({eta}*m)"), delta0).expect("preset rule")
}

fn regularized(tau1: &str, tau2: &str) -> EstimatorSpec {
    EstimatorSpec::regularized(tau1, tau2).expect("preset rule")
}

fn base(id: &str) -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: id.to_string(),
        state: StateFamily::haar_pure(),
        n: 5,
        shots: Shots::Finite(100),
        m_grid: MGrid::step(64, 1024, 64),
        runs: 120,
        noise: gaussian(1.0),
        z_spec: None,
        estimator: regularized("0.011*m", "0.16"),
        solver: SolverOptions::default(),
        seed: DEFAULT_SEED,
        parallelism: None,
        sweep: Vec::new(),
    }
}

fn both_noises() -> SweepAxis {
    SweepAxis::Noise(vec![gaussian(1.0), poisson(1.0)])
}

/// Builds a named preset. Unknown names list the valid ones.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut c = base(name);
    match name {
        "fig2a" | "fig2b" | "fig2c" | "fig2d" => {
            let k = (name.as_bytes()[4] - b'a') as u64;
            c.shots = Shots::Finite(50 * (k + 1));
            c.sweep = vec![both_noises()];
        }
        "fig3" => {
            c.m_grid = MGrid::Counts(vec![512]);
            c.sweep = vec![SweepAxis::Eta((0..=15).map(|i| i as f64 * 0.02).map(round6).collect())];
        }
        "fig4" => {
            c.m_grid = MGrid::Counts(vec![512]);
            c.sweep = vec![
                both_noises(),
                SweepAxis::NoiseLevel(vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]),
            ];
        }
        "fig5a" | "fig5b" => {
            c.shots = Shots::Finite(if name == "fig5a" { 100 } else { 200 });
            c.state = StateFamily::rank_r(2);
            c.estimator = regularized("0.0055*m", "0.15");
            c.sweep = vec![SweepAxis::Rank(vec![2, 3])];
        }
        "fig6a" | "fig6b" => {
            c.shots = Shots::Finite(if name == "fig6a" { 100 } else { 200 });
            c.state = StateFamily::haar_pure().with_depolarizing(0.01);
        }
        "figA" => {
            c.shots = Shots::Finite(250);
            c.z_spec = Some(NoiseSpec::ScaledGaussianBall { delta: 0.1 });
            c.estimator = EstimatorSpec::Constrained { beta: 2.5, delta: 0.1 };
        }
        "figB" => {
            c.shots = Shots::Finite(150);
            c.z_spec = Some(NoiseSpec::ScaledGaussianBall { delta: 0.1 });
            c.estimator = EstimatorSpec::Penalized {
                lambda1: "0.001*m".parse()?,
                lambda2: "0.014+0.002*(m-64)/m".parse()?,
                delta: 0.1,
            };
        }
        "figW" => {
            c.state = StateFamily::w_state();
            c.sweep = vec![both_noises()];
        }
        "figN" => {
            c.m_grid = MGrid::Counts(vec![512]);
            // 10^2 .. 10^(11/3) in thirds of a decade
            let ns = [100, 215, 464, 1000, 2154, 4642];
            c.sweep = vec![SweepAxis::Shots(ns.iter().map(|&n| Shots::Finite(n)).collect())];
        }
        "figE" => {
            c.m_grid = MGrid::Counts(vec![512]);
            c.sweep = vec![SweepAxis::NoiseLevel((-2..=7).map(|k| 2f64.powi(k)).collect())];
        }
        "figF" => {
            c.n = 6;
            c.runs = 20;
            c.m_grid = MGrid::Ratios((1..=8).map(|k| k as f64 * 0.0625).collect());
            c.estimator = regularized("0.0055*m", "0.16");
            c.sweep = vec![SweepAxis::Qubits(vec![6, 7])];
        }
        "figG" => {
            c.noise = bounded("0.04", 0.5);
            c.sweep = vec![
                SweepAxis::Noise(vec![
                    bounded("0.04", 0.5),
                    bounded("0.04", 1.0),
                    bounded("1", 0.5),
                    bounded("1", 1.0),
                    NoiseSpec::None,
                ]),
                SweepAxis::Estimator(vec![
                    regularized("0.011*m", "0.16"),
                    EstimatorSpec::matrix_lasso("0.011*m")?,
                ]),
            ];
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESETS.join(", "),
            })
        }
    }
    Ok(c)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}
