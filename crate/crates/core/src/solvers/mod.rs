//! Convex reconstruction of `(ρ, v)` from corrupted Pauli data.
//!
//! All estimators live on the PSD cone, where `‖X‖_tr = Tr X`, so the matrix
//! part of every proximal step is one eigenvalue shrink-and-clip. The sampling
//! map satisfies `A A* = d·I_m` for distinct Pauli settings, which pins the
//! gradient Lipschitz constants to `d + 1` (joint `(X, v)`) and `d` (`X` only).

mod apg;
mod prox;
mod splitting;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use apg::{
    kkt_residual_lasso, kkt_residual_regularized, lasso_objective, regularized_objective, solve_matrix_lasso,
    solve_regularized,
};
pub use prox::{project_l1_ball, project_l2_ball, prox_trace_psd, soft_threshold};
pub use splitting::{solve_constrained, solve_penalized};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qstate::DensityMatrix;

/// Below this trace a raw estimate is replaced by `I/d` and flagged.
pub const DEGENERATE_TRACE: f64 = 1e-8;

const MAX_EXPORTED_TRACE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop when the objective moves less than this (relative) over 10 iterations.
    pub rel_obj_tol: f64,
    pub kkt_tol: f64,
    /// Initial penalty of the splitting methods; adapted by residual balancing.
    pub admm_rho: f64,
    pub restart: bool,
    /// Use the exact Lipschitz constant instead of backtracking.
    pub exact_step: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 20_000,
            rel_obj_tol: 1e-15,
            kkt_tol: 1e-6,
            admm_rho: 1.0,
            restart: true,
            exact_step: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        for (name, v) in [
            ("rel_obj_tol", self.rel_obj_tol),
            ("kkt_tol", self.kkt_tol),
            ("admm_rho", self.admm_rho),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    /// Renormalized estimate (or `I/d` when `degenerate`).
    pub rho_hat: DensityMatrix,
    /// PSD estimate before renormalization.
    pub rho_raw: CMatrix,
    pub v_hat: Vec<f64>,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    pub converged: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
    pub degenerate: bool,
    pub raw_trace: f64,
    /// At most 1000 evenly spaced samples, always including the last value.
    pub objective_trace: Vec<f64>,
}

impl ReconstructionResult {
    pub fn diagnostics(&self) -> SolverDiagnostics {
        SolverDiagnostics {
            iterations: self.iterations,
            kkt_residual: self.kkt_residual,
            converged: self.converged,
            degenerate: self.degenerate,
            raw_trace: linalg::trace_re(&self.rho_raw),
            objective_trace: downsample(&self.objective_trace, MAX_EXPORTED_TRACE),
        }
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    fn assemble(raw: CMatrix, v_hat: Vec<f64>, iterations: usize, objective_trace: Vec<f64>, kkt: f64, converged: bool) -> Self {
        let renorm = renormalize(&raw);
        ReconstructionResult {
            rho_hat: renorm.rho,
            rho_raw: raw,
            v_hat,
            iterations,
            objective_trace,
            kkt_residual: kkt,
            converged,
            degenerate: renorm.degenerate,
        }
    }
}

fn downsample(xs: &[f64], max: usize) -> Vec<f64> {
    if xs.len() <= max {
        return xs.to_vec();
    }
    let last = xs.len() - 1;
    (0..max).map(|i| xs[i * last / (max - 1)]).collect()
}

#[derive(Debug, Clone)]
pub struct Renormalized {
    pub rho: DensityMatrix,
    pub degenerate: bool,
}

/// `X / Tr X`, or `I/d` with `degenerate = true` when `Tr X ≤ 1e-8`.
pub fn renormalize(x: &CMatrix) -> Renormalized {
    let d = x.nrows();
    let tr = linalg::trace_re(x);
    if !(tr > DEGENERATE_TRACE) {
        return Renormalized {
            rho: DensityMatrix::maximally_mixed(d),
            degenerate: true,
        };
    }
    Renormalized {
        rho: DensityMatrix::from_raw(linalg::hermitize(x) / Complex64::new(tr, 0.0)),
        degenerate: false,
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub(crate) fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

pub(crate) fn initial_state(d: usize) -> CMatrix {
    linalg::identity(d) * Complex64::new(1.0 / d as f64, 0.0)
}
