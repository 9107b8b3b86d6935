//! Corrupted-sensing quantum state tomography.
//!
//! Simulates Pauli measurements of multi-qubit states under sparse outlier
//! corruption and reconstructs the state with convex estimators.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod noise;
pub mod qstate;
pub mod rule;
pub mod solvers;

pub use error::{Error, Result};
pub use harness::{preset, run_experiment, ExperimentConfig};
pub use measurement::{MeasurementPlan, MeasurementRecord, PauliString, Shots};
pub use metrics::{fidelity, mse, MetricReport};
pub use noise::NoiseSpec;
pub use qstate::{DensityMatrix, StateFamily};
pub use solvers::{ReconstructionResult, SolverOptions};
