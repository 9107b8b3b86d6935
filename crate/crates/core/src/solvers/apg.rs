//! Accelerated proximal gradient (FISTA with function-value restart) for
//!
//! ```text
//! min_{X ⪰ 0, v}  ½‖y - M(X) - v‖² + τ₁ Tr X + τ₂ ‖v‖₁
//! ```
//!
//! and for the matrix Lasso, which is the same problem with `v` pinned to 0.

use num_complex::Complex64;

use super::prox::{shrink_psd, soft};
use super::{check_positive, initial_state, ReconstructionResult, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measurement::{MeasurementPlan, MeasurementRecord};

#[derive(Clone)]
struct Point {
    x: CMatrix,
    v: Vec<f64>,
    /// `M(x)`, carried along so extrapolation never re-applies the map.
    ax: Vec<f64>,
    trace: f64,
}

struct Problem<'a> {
    plan: &'a MeasurementPlan,
    y: &'a [f64],
    tau1: f64,
    /// `None` pins `v = 0` (matrix Lasso).
    tau2: Option<f64>,
    lipschitz: f64,
}

impl<'a> Problem<'a> {
    fn new(plan: &'a MeasurementPlan, y: &'a [f64], tau1: f64, tau2: Option<f64>) -> Self {
        let d = plan.dim() as f64;
        let lipschitz = if tau2.is_some() { d + 1.0 } else { d };
        Problem {
            plan,
            y,
            tau1,
            tau2,
            lipschitz,
        }
    }

    fn point(&self, x: CMatrix, v: Vec<f64>) -> Point {
        let mut ax = vec![0.0; self.plan.len()];
        self.plan.apply_into(&x, &mut ax);
        let trace = linalg::trace_re(&x);
        Point { x, v, ax, trace }
    }

    fn residual(&self, ax: &[f64], v: &[f64]) -> Vec<f64> {
        self.y
            .iter()
            .zip(ax)
            .zip(v)
            .map(|((y, a), v)| y - a - v)
            .collect()
    }

    fn smooth(&self, p: &Point) -> f64 {
        0.5 * self.residual(&p.ax, &p.v).iter().map(|r| r * r).sum::<f64>()
    }

    fn objective(&self, p: &Point) -> f64 {
        let l1 = self.tau2.map_or(0.0, |t| t * linalg::l1_norm(&p.v));
        self.smooth(p) + self.tau1 * p.trace + l1
    }

    /// One forward-backward step from `p` with step `1/lip`.
    fn step(&self, p: &Point, lip: f64) -> Point {
        let r = self.residual(&p.ax, &p.v);
        let mut grad = CMatrix::zeros(p.x.nrows(), p.x.ncols());
        self.plan.adjoint_into(&r, &mut grad);
        let moved = &p.x + grad / Complex64::new(lip, 0.0);
        let (x, trace) = shrink_psd(&moved, self.tau1 / lip);
        let v = match self.tau2 {
            Some(t2) => p
                .v
                .iter()
                .zip(&r)
                .map(|(v, r)| soft(v + r / lip, t2 / lip))
                .collect(),
            None => vec![0.0; p.v.len()],
        };
        let mut ax = vec![0.0; self.plan.len()];
        self.plan.apply_into(&x, &mut ax);
        Point { x, v, ax, trace }
    }

    fn distance(a: &Point, b: &Point) -> f64 {
        let dx = linalg::frobenius_norm_sq(&(&a.x - &b.x));
        let dv: f64 = a.v.iter().zip(&b.v).map(|(p, q)| (p - q) * (p - q)).sum();
        (dx + dv).sqrt()
    }

    /// Scaled fixed-point gap `L‖p - step(p)‖`.
    fn kkt(&self, p: &Point) -> f64 {
        self.lipschitz * Self::distance(p, &self.step(p, self.lipschitz))
    }

    /// Quadratic upper model test for backtracking.
    fn sufficient_decrease(&self, from: &Point, to: &Point, lip: f64) -> bool {
        let r = self.residual(&from.ax, &from.v);
        let lin: f64 = r
            .iter()
            .zip(to.ax.iter().zip(&from.ax))
            .zip(to.v.iter().zip(&from.v))
            .map(|((r, (a1, a0)), (v1, v0))| -r * ((a1 - a0) + (v1 - v0)))
            .sum();
        let dist = Self::distance(from, to);
        self.smooth(to) <= self.smooth(from) + lin + 0.5 * lip * dist * dist + 1e-12
    }

    fn extrapolate(cur: &Point, prev: &Point, beta: f64) -> Point {
        let b = Complex64::new(beta, 0.0);
        let mix = |a: &[f64], p: &[f64]| -> Vec<f64> {
            a.iter().zip(p).map(|(a, p)| a + beta * (a - p)).collect()
        };
        Point {
            x: &cur.x + (&cur.x - &prev.x) * b,
            v: mix(&cur.v, &prev.v),
            ax: mix(&cur.ax, &prev.ax),
            trace: cur.trace + beta * (cur.trace - prev.trace),
        }
    }

    fn solve(&self, opts: &SolverOptions) -> ReconstructionResult {
        let m = self.plan.len();
        let d = self.plan.dim();
        let mut cur = self.point(initial_state(d), vec![0.0; m]);
        let mut f_cur = self.objective(&cur);
        let mut trace = vec![f_cur];
        let mut search = cur.clone();
        let mut t = 1.0f64;
        let mut fresh = true;
        let mut lip = if opts.exact_step { self.lipschitz } else { 1.0 };
        let mut converged_kkt = None;
        let mut iterations = 0;

        while iterations < opts.max_iters {
            iterations += 1;
            let cand = loop {
                let cand = self.step(&search, lip);
                if opts.exact_step || lip >= self.lipschitz || self.sufficient_decrease(&search, &cand, lip) {
                    break cand;
                }
                lip = (lip * 2.0).min(self.lipschitz);
            };
            let f_cand = self.objective(&cand);
            if opts.restart && !fresh && f_cand > f_cur {
                // momentum overshot: drop it and retake a plain step from `cur`
                search = cur.clone();
                t = 1.0;
                fresh = true;
                continue;
            }
            let gap = lip * Self::distance(&search, &cand);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            search = Self::extrapolate(&cand, &cur, (t - 1.0) / t_next);
            t = t_next;
            fresh = false;
            cur = cand;
            f_cur = f_cand;
            trace.push(f_cur);

            if gap <= opts.kkt_tol {
                let k = self.kkt(&cur);
                if k <= opts.kkt_tol {
                    converged_kkt = Some(k);
                    break;
                }
            }
            let n = trace.len();
            if n > 10 && (trace[n - 11] - f_cur).abs() <= opts.rel_obj_tol * f_cur.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }

        let kkt = converged_kkt.unwrap_or_else(|| self.kkt(&cur));
        ReconstructionResult::assemble(cur.x, cur.v, iterations, trace, kkt, kkt <= opts.kkt_tol)
    }
}

fn check_record(record: &MeasurementRecord) -> Result<()> {
    if record.y.len() != record.m() {
        return Err(Error::DimensionMismatch {
            expected: record.m(),
            actual: record.y.len(),
        });
    }
    Ok(())
}

/// Joint estimate of `(ρ, v)` from the trace-norm + ℓ1 regularized least squares.
pub fn solve_regularized(
    record: &MeasurementRecord,
    tau1: f64,
    tau2: f64,
    opts: &SolverOptions,
) -> Result<ReconstructionResult> {
    check_positive("tau1", tau1)?;
    check_positive("tau2", tau2)?;
    opts.validate()?;
    check_record(record)?;
    Ok(Problem::new(&record.plan, &record.y, tau1, Some(tau2)).solve(opts))
}

/// Trace-norm regularized least squares without a corruption variable.
pub fn solve_matrix_lasso(record: &MeasurementRecord, mu: f64, opts: &SolverOptions) -> Result<ReconstructionResult> {
    check_positive("mu", mu)?;
    opts.validate()?;
    check_record(record)?;
    Ok(Problem::new(&record.plan, &record.y, mu, None).solve(opts))
}

fn kkt_at(problem: &Problem<'_>, x: &CMatrix, v: &[f64]) -> Result<f64> {
    let d = problem.plan.dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x.nrows(),
        });
    }
    if v.len() != problem.plan.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.plan.len(),
            actual: v.len(),
        });
    }
    Ok(problem.kkt(&problem.point(x.clone(), v.to_vec())))
}

/// Proximal-gradient fixed-point gap of the regularized objective at `(x, v)`,
/// scaled by the Lipschitz constant `d + 1`.
pub fn kkt_residual_regularized(
    x: &CMatrix,
    v: &[f64],
    record: &MeasurementRecord,
    tau1: f64,
    tau2: f64,
) -> Result<f64> {
    check_positive("tau1", tau1)?;
    check_positive("tau2", tau2)?;
    kkt_at(&Problem::new(&record.plan, &record.y, tau1, Some(tau2)), x, v)
}

pub fn kkt_residual_lasso(x: &CMatrix, record: &MeasurementRecord, mu: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    kkt_at(&Problem::new(&record.plan, &record.y, mu, None), x, &vec![0.0; record.m()])
}

/// Objective value of the regularized problem (used by oracles and tests).
pub fn regularized_objective(x: &CMatrix, v: &[f64], record: &MeasurementRecord, tau1: f64, tau2: f64) -> f64 {
    let p = Problem::new(&record.plan, &record.y, tau1, Some(tau2));
    p.objective(&p.point(x.clone(), v.to_vec()))
}

pub fn lasso_objective(x: &CMatrix, record: &MeasurementRecord, mu: f64) -> f64 {
    let p = Problem::new(&record.plan, &record.y, mu, None);
    p.objective(&p.point(x.clone(), vec![0.0; record.m()]))
}
