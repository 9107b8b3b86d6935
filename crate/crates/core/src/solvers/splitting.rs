//! Linearized ADMM for the ball-constrained estimators
//!
//! ```text
//! constrained:  min Tr X            s.t. X ⪰ 0, ‖v‖₁ ≤ b, ‖y - M(X) - v‖₂ ≤ δ
//! penalized:    min λ₁Tr X + λ₂‖v‖₁ s.t. X ⪰ 0,          ‖y - M(X) - v‖₂ ≤ δ
//! ```
//!
//! Both are written as `min f(X, v) + ι(w ∈ B₂(δ))` with `M(X) + v + w = y`.
//! The `(X, v)` block is linearized with `L = d + 1 = ‖[M, I]‖²`.

use num_complex::Complex64;

use super::prox::{project_l1_ball, project_l2_ball, shrink_psd, soft};
use super::{check_nonnegative, check_positive, initial_state, ReconstructionResult, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measurement::MeasurementRecord;

#[derive(Clone, Copy)]
enum VTerm {
    Budget(f64),
    Penalty(f64),
}

struct Splitting<'a> {
    record: &'a MeasurementRecord,
    trace_weight: f64,
    vterm: VTerm,
    delta: f64,
}

fn sq(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum()
}

impl Splitting<'_> {
    fn objective(&self, trace: f64, v: &[f64]) -> f64 {
        match self.vterm {
            VTerm::Budget(_) => self.trace_weight * trace,
            VTerm::Penalty(l2) => self.trace_weight * trace + l2 * linalg::l1_norm(v),
        }
    }

    fn solve(&self, opts: &SolverOptions) -> ReconstructionResult {
        let plan = &self.record.plan;
        let y = &self.record.y;
        let m = plan.len();
        let d = plan.dim();
        let lip = (d + 1) as f64;
        let mut rho = opts.admm_rho;

        let mut x = initial_state(d);
        let mut trace = 1.0;
        let mut v = vec![0.0; m];
        let mut ax = vec![0.0; m];
        plan.apply_into(&x, &mut ax);
        let mut w = project_l2_ball(&residual(y, &ax, &v), self.delta);
        let mut u = vec![0.0; m];

        let mut grad = CMatrix::zeros(d, d);
        let mut ax_new = vec![0.0; m];
        let mut objective_trace = vec![self.objective(trace, &v)];
        let mut iterations = 0;
        let mut primal = f64::INFINITY;
        let mut dual = f64::INFINITY;
        // tight enough that the returned residual sits within δ(1 + 1e-6)
        let primal_tol = if self.delta > 0.0 {
            opts.kkt_tol.min(5e-7 * self.delta)
        } else {
            opts.kkt_tol
        };

        while iterations < opts.max_iters {
            iterations += 1;
            // r = Kx + w - y + u
            let r: Vec<f64> = (0..m).map(|k| ax[k] + v[k] + w[k] - y[k] + u[k]).collect();
            plan.adjoint_into(&r, &mut grad);
            let moved = &x - &grad / Complex64::new(lip, 0.0);
            let (x_new, trace_new) = shrink_psd(&moved, self.trace_weight / (rho * lip));
            let v_step: Vec<f64> = v.iter().zip(&r).map(|(v, r)| v - r / lip).collect();
            let v_new = match self.vterm {
                VTerm::Budget(b) => project_l1_ball(&v_step, b),
                VTerm::Penalty(l2) => v_step.iter().map(|z| soft(*z, l2 / (rho * lip))).collect(),
            };
            plan.apply_into(&x_new, &mut ax_new);

            let target: Vec<f64> = (0..m).map(|k| y[k] - ax_new[k] - v_new[k] - u[k]).collect();
            let w_new = project_l2_ball(&target, self.delta);
            let gap: Vec<f64> = (0..m).map(|k| ax_new[k] + v_new[k] + w_new[k] - y[k]).collect();
            for (u, g) in u.iter_mut().zip(&gap) {
                *u += g;
            }

            // q = KΔx + Δw; dual residual is ρ‖LΔx - Kᵀq‖
            let q: Vec<f64> = (0..m)
                .map(|k| (ax_new[k] - ax[k]) + (v_new[k] - v[k]) + (w_new[k] - w[k]))
                .collect();
            plan.adjoint_into(&q, &mut grad);
            let dx = (&x_new - &x) * Complex64::new(lip, 0.0) - &grad;
            let dv: Vec<f64> = (0..m).map(|k| lip * (v_new[k] - v[k]) - q[k]).collect();
            primal = sq(&gap).sqrt();
            dual = rho * (linalg::frobenius_norm_sq(&dx) + sq(&dv)).sqrt();

            x = x_new;
            trace = trace_new;
            v = v_new;
            w = w_new;
            std::mem::swap(&mut ax, &mut ax_new);
            objective_trace.push(self.objective(trace, &v));

            if primal <= primal_tol && dual <= opts.kkt_tol {
                break;
            }
            if iterations % 10 == 0 {
                let scale = if primal > 10.0 * dual {
                    2.0
                } else if dual > 10.0 * primal {
                    0.5
                } else {
                    1.0
                };
                if scale != 1.0 {
                    rho *= scale;
                    u.iter_mut().for_each(|u| *u /= scale);
                }
            }
        }

        self.polish(&ax, &mut v);
        let kkt = primal.max(dual);
        let converged = primal <= primal_tol && dual <= opts.kkt_tol;
        ReconstructionResult::assemble(x, v, iterations, objective_trace, kkt, converged)
    }

    /// Moves the leftover residual outside the δ-ball into `v`, when the
    /// ℓ1 budget allows it, so the returned pair is exactly feasible.
    fn polish(&self, ax: &[f64], v: &mut [f64]) {
        let r = residual(&self.record.y, ax, v);
        let inside = project_l2_ball(&r, self.delta);
        let shifted: Vec<f64> = v.iter().zip(r.iter().zip(&inside)).map(|(v, (r, p))| v + (r - p)).collect();
        let ok = match self.vterm {
            VTerm::Budget(b) => linalg::l1_norm(&shifted) <= b,
            VTerm::Penalty(_) => true,
        };
        if ok {
            v.copy_from_slice(&shifted);
        }
    }
}

fn residual(y: &[f64], ax: &[f64], v: &[f64]) -> Vec<f64> {
    y.iter().zip(ax).zip(v).map(|((y, a), v)| y - a - v).collect()
}

fn check(record: &MeasurementRecord, delta: f64, opts: &SolverOptions) -> Result<()> {
    check_nonnegative("delta", delta)?;
    opts.validate()?;
    if record.y.len() != record.m() {
        return Err(Error::DimensionMismatch {
            expected: record.m(),
            actual: record.y.len(),
        });
    }
    Ok(())
}

/// Trace minimization under an ℓ1 budget on `v` and an ℓ2 residual ball.
pub fn solve_constrained(
    record: &MeasurementRecord,
    l1_budget: f64,
    delta: f64,
    opts: &SolverOptions,
) -> Result<ReconstructionResult> {
    check_nonnegative("l1_budget", l1_budget)?;
    check(record, delta, opts)?;
    let s = Splitting {
        record,
        trace_weight: 1.0,
        vterm: VTerm::Budget(l1_budget),
        delta,
    };
    Ok(s.solve(opts))
}

pub fn solve_penalized(
    record: &MeasurementRecord,
    lambda1: f64,
    lambda2: f64,
    delta: f64,
    opts: &SolverOptions,
) -> Result<ReconstructionResult> {
    check_positive("lambda1", lambda1)?;
    check_positive("lambda2", lambda2)?;
    check(record, delta, opts)?;
    let s = Splitting {
        record,
        trace_weight: lambda1,
        vterm: VTerm::Penalty(lambda2),
        delta,
    };
    Ok(s.solve(opts))
}
