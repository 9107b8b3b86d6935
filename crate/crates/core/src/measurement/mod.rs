//! Pauli settings, the sampling map and its adjoint, and finite-shot
//! acquisition of corrupted data vectors.

mod pauli;
mod plan;
mod record;

pub use pauli::{Pauli, PauliString, MAX_QUBITS};
pub use plan::{expectation, expectation_dense, sample_paulis, MeasurementPlan};
pub use record::{acquire, simulate_shots, MeasurementRecord, Shots};
