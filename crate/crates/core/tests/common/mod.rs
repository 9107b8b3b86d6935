//! Independent reference implementations used by the integration and
//! acceptance tests. None of these call into the solver internals: Pauli maps
//! are built from dense Kronecker products and PSD projections go through a
//! real symmetric embedding.

#![allow(dead_code)]

use csqst::linalg::CMatrix;
use csqst::measurement::{MeasurementPlan, PauliString};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// `[[Re, -Im], [Im, Re]]`; its spectrum is the Hermitian spectrum doubled.
fn embed(m: &CMatrix) -> DMatrix<f64> {
    let d = m.nrows();
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = m[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn unembed(r: &DMatrix<f64>) -> CMatrix {
    let d = r.nrows() / 2;
    CMatrix::from_fn(d, d, |i, j| Complex64::new(r[(i, j)], r[(i + d, j)]))
}

/// `argmin_X⪰0 ½‖X - M‖² + t Tr X`, by the real embedding.
pub fn shrink_psd_embedded(m: &CMatrix, t: f64) -> CMatrix {
    let e = SymmetricEigen::new(embed(m));
    let vals = e.eigenvalues.map(|l| (l - t).max(0.0));
    let r = &e.eigenvectors * DMatrix::from_diagonal(&vals) * e.eigenvectors.transpose();
    unembed(&r)
}

/// Projected gradient with a small step on `½‖X - M‖² + t Tr X` over the PSD cone.
pub fn prox_trace_psd_oracle(m: &CMatrix, t: f64) -> CMatrix {
    let d = m.nrows();
    let step = 0.05;
    let mut x = CMatrix::zeros(d, d);
    for _ in 0..2000 {
        let grad = &x - m + CMatrix::identity(d, d) * Complex64::new(t, 0.0);
        x = shrink_psd_embedded(&(&x - grad * Complex64::new(step, 0.0)), 0.0);
    }
    x
}

/// Per coordinate: the best of zero and the stationary points of the two
/// smooth pieces that actually lie in their piece.
pub fn soft_threshold_oracle(x: &[f64], t: f64) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let f = |u: f64| 0.5 * (u - xi) * (u - xi) + t * u.abs();
            let mut best = 0.0;
            for c in [xi - t, xi + t] {
                let in_piece = (c > 0.0 && c == xi - t) || (c < 0.0 && c == xi + t);
                if in_piece && f(c) < f(best) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Bisection on the dual threshold θ with Σ max(|x_i| - θ, 0) = r.
pub fn project_l1_oracle(x: &[f64], r: f64) -> Vec<f64> {
    if x.iter().map(|v| v.abs()).sum::<f64>() <= r {
        return x.to_vec();
    }
    let (mut lo, mut hi) = (0.0, x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = x.iter().map(|v| (v.abs() - mid).max(0.0)).sum();
        if s > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th = 0.5 * (lo + hi);
    x.iter().map(|v| v.signum() * (v.abs() - th).max(0.0)).collect()
}

/// Dense Pauli matrices from single-qubit factors.
pub fn pauli_dense(p: &PauliString) -> CMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut out = CMatrix::from_element(1, 1, c(1.0, 0.0));
    for l in p.to_string().chars() {
        let f = match l {
            'I' => CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
            'X' => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            'Y' => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            'Z' => CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
            _ => unreachable!(),
        };
        out = out.kronecker(&f);
    }
    out
}

pub struct DenseMap {
    pub paulis: Vec<CMatrix>,
    pub d: usize,
}

impl DenseMap {
    pub fn new(plan: &MeasurementPlan) -> Self {
        DenseMap {
            paulis: plan.paulis().iter().map(pauli_dense).collect(),
            d: plan.dim(),
        }
    }

    pub fn apply(&self, x: &CMatrix) -> Vec<f64> {
        self.paulis.iter().map(|p| (p * x).trace().re).collect()
    }

    pub fn adjoint(&self, c: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for (p, ck) in self.paulis.iter().zip(c) {
            out += p * Complex64::new(*ck, 0.0);
        }
        out
    }
}

pub fn regularized_value(map: &DenseMap, y: &[f64], x: &CMatrix, v: &[f64], tau1: f64, tau2: f64) -> f64 {
    let ax = map.apply(x);
    let r2: f64 = y.iter().zip(&ax).zip(v).map(|((y, a), v)| (y - a - v).powi(2)).sum();
    0.5 * r2 + tau1 * x.trace().re + tau2 * v.iter().map(|v| v.abs()).sum::<f64>()
}

/// Plain (unaccelerated) proximal gradient on the joint regularized problem,
/// step `1/(d+1)`, from `(I/d, 0)`.
pub fn regularized_pg_oracle(
    plan: &MeasurementPlan,
    y: &[f64],
    tau1: f64,
    tau2: f64,
    iters: usize,
) -> (CMatrix, Vec<f64>, f64) {
    let map = DenseMap::new(plan);
    let d = plan.dim();
    let l = d as f64 + 1.0;
    let mut x = CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
    let mut v = vec![0.0; y.len()];
    for _ in 0..iters {
        let ax = map.apply(&x);
        let r: Vec<f64> = (0..y.len()).map(|k| y[k] - ax[k] - v[k]).collect();
        let g = map.adjoint(&r);
        x = shrink_psd_embedded(&(&x + g / Complex64::new(l, 0.0)), tau1 / l);
        v = v
            .iter()
            .zip(&r)
            .map(|(v, r)| {
                let z = v + r / l;
                z.signum() * (z.abs() - tau2 / l).max(0.0)
            })
            .collect();
    }
    let f = regularized_value(&map, y, &x, &v, tau1, tau2);
    (x, v, f)
}

/// Plain proximal gradient for the matrix Lasso, step `1/d`.
pub fn lasso_pg_oracle(plan: &MeasurementPlan, y: &[f64], mu: f64, iters: usize) -> CMatrix {
    let map = DenseMap::new(plan);
    let d = plan.dim();
    let l = d as f64;
    let mut x = CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
    for _ in 0..iters {
        let ax = map.apply(&x);
        let r: Vec<f64> = (0..y.len()).map(|k| y[k] - ax[k]).collect();
        x = shrink_psd_embedded(&(&x + map.adjoint(&r) / Complex64::new(l, 0.0)), mu / l);
    }
    x
}

/// Spearman rank correlation (average ranks for ties) and its two-sided
/// p-value from the t approximation with `n - 2` degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> (f64, f64) {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    let rho = cov / (vx * vy).sqrt();
    let t = rho * ((n - 2.0) / (1.0 - rho * rho).max(1e-300)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 2.0).unwrap();
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    (rho, p)
}
