//! Reconstruction quality: fidelity, MSE, relative ℓ2 error, ℓκ and trace norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::qstate::DensityMatrix;

/// Squared fidelity `(Tr √(√σ ρ √σ))²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

pub(crate) fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            actual: sigma.nrows(),
        });
    }
    let sqrt_sigma = linalg::psd_sqrt(sigma)?;
    let inner = linalg::hermitize(&(&sqrt_sigma * rho * &sqrt_sigma));
    let eig = HermitianEigen::new(&inner);
    linalg::check_psd(&eig)?;
    let floor = eig.noise_floor();
    let root_sum: f64 = eig.values.iter().filter(|l| **l > floor).map(|l| l.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// `(1/m) Σ (v_i - v̂_i)²`.
pub fn mse(v: &[f64], v_hat: &[f64]) -> Result<f64> {
    check_lengths(v, v_hat)?;
    if v.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    let sum: f64 = v.iter().zip(v_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / v.len() as f64)
}

/// `‖v̂ - v‖₂ / ‖v‖₂`, or `None` when `v = 0`.
pub fn rel_l2_error(v: &[f64], v_hat: &[f64]) -> Result<Option<f64>> {
    check_lengths(v, v_hat)?;
    let denom = linalg::l2_norm(v);
    if denom == 0.0 {
        return Ok(None);
    }
    let diff: Vec<f64> = v.iter().zip(v_hat).map(|(a, b)| b - a).collect();
    Ok(Some(linalg::l2_norm(&diff) / denom))
}

/// `(Σ |x_i|^κ)^{1/κ}` for `κ ≥ 1`.
pub fn lk_norm(x: &[f64], kappa: f64) -> Result<f64> {
    if !(kappa >= 1.0) {
        return Err(Error::invalid(format!("kappa {kappa} must be >= 1")));
    }
    Ok(if kappa == 1.0 {
        linalg::l1_norm(x)
    } else if kappa == 2.0 {
        linalg::l2_norm(x)
    } else {
        x.iter().map(|v| v.abs().powf(kappa)).sum::<f64>().powf(1.0 / kappa)
    })
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    if x.nrows() == x.ncols() && linalg::hermitian_deviation(x) <= 1e-14 * (1.0 + x.norm()) {
        return HermitianEigen::new(x).values.iter().map(|l| l.abs()).sum();
    }
    x.clone().singular_values().iter().sum()
}

/// `½ ‖ρ - σ‖_tr`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub fidelity: f64,
    pub mse: f64,
    pub rel_l2: Option<f64>,
    pub trace_distance: f64,
}

impl MetricReport {
    pub fn compute(rho: &DensityMatrix, rho_hat: &DensityMatrix, v: &[f64], v_hat: &[f64]) -> Result<Self> {
        Ok(MetricReport {
            fidelity: fidelity(rho, rho_hat)?,
            mse: mse(v, v_hat)?,
            rel_l2: rel_l2_error(v, v_hat)?,
            trace_distance: trace_distance(rho, rho_hat)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{haar_random_pure, random_rank_r};
    use nalgebra::DVector;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn basis(i: usize, d: usize) -> DensityMatrix {
        let mut v = DVector::zeros(d);
        v[i] = Complex64::new(1.0, 0.0);
        DensityMatrix::pure(&v).unwrap()
    }

    #[test]
    fn fidelity_closed_forms() {
        let zero = basis(0, 2);
        let one = basis(1, 2);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-9);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-9);
        assert!((fidelity(&mixed, &zero).unwrap() - 0.5).abs() < 1e-9);
        assert!(fidelity(&zero, &basis(0, 4)).is_err());
    }

    #[test]
    fn fidelity_of_state_with_itself() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let rho = random_rank_r(3, 3, &mut r).unwrap();
            assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_pure_overlap_and_symmetry() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a: DVector<Complex64> =
                DVector::from_fn(8, |_, _| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))).normalize();
            let b: DVector<Complex64> =
                DVector::from_fn(8, |_, _| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))).normalize();
            let overlap = a.dotc(&b).norm_sqr();
            let (ra, rb) = (DensityMatrix::pure(&a).unwrap(), DensityMatrix::pure(&b).unwrap());
            let f = fidelity(&ra, &rb).unwrap();
            assert!((f - overlap).abs() < 1e-10, "{f} vs {overlap}");
            let mixed = random_rank_r(3, 2, &mut r).unwrap();
            let f1 = fidelity(&ra, &mixed).unwrap();
            let f2 = fidelity(&mixed, &ra).unwrap();
            assert!((f1 - f2).abs() < 1e-9);
        }
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4]).unwrap(), 0.25);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());

        let mut r = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..200).map(|_| r.sample(StandardNormal)).collect();
        let w: Vec<f64> = (0..200).map(|_| r.sample(StandardNormal)).collect();
        // two-pass: differences first, then squares
        let diffs: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
        let mut naive = 0.0;
        for d in &diffs {
            naive += d * d;
        }
        naive /= 200.0;
        assert!((mse(&v, &w).unwrap() - naive).abs() < 1e-12);
        let l2 = lk_norm(&diffs, 2.0).unwrap();
        assert!((mse(&v, &w).unwrap() - l2 * l2 / 200.0).abs() < 1e-12);
    }

    #[test]
    fn rel_l2_cases() {
        let v = [3.0, -4.0, 0.0];
        assert_eq!(rel_l2_error(&v, &v).unwrap(), Some(0.0));
        assert_eq!(rel_l2_error(&v, &[0.0; 3]).unwrap(), Some(1.0));
        assert_eq!(rel_l2_error(&v, &[6.0, -8.0, 0.0]).unwrap(), Some(1.0));
        assert_eq!(rel_l2_error(&[0.0; 3], &v).unwrap(), None);
    }

    #[test]
    fn lk_norm_cases() {
        assert_eq!(lk_norm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(lk_norm(&[3.0, 4.0], 1.0).unwrap(), 7.0);
        assert!((lk_norm(&[1.0, 1.0, 1.0], 3.0).unwrap() - 3f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(lk_norm(&[1.0], 0.5).is_err());
    }

    #[test]
    fn trace_norm_cases() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let rho = haar_random_pure(3, &mut r).unwrap();
        assert!((trace_norm(rho.matrix()) - 1.0).abs() < 1e-10);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(-3.0, 0.0)]));
        assert!((trace_norm(&d) - 5.0).abs() < 1e-12);

        // general complex matrix against the singular values of M*M
        let m = CMatrix::from_fn(5, 5, |_, _| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)));
        let gram = m.adjoint() * &m;
        let oracle: f64 = HermitianEigen::new(&crate::linalg::hermitize(&gram))
            .values
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum();
        assert!((trace_norm(&m) - oracle).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_bounds_trace() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let rho = random_rank_r(3, 4, &mut r).unwrap();
        let tr = crate::linalg::trace_re(rho.matrix());
        assert!((trace_norm(rho.matrix()) - tr.abs()).abs() < 1e-10);
        let indefinite = rho.matrix() - DensityMatrix::maximally_mixed(8).matrix() * Complex64::new(0.5, 0.0);
        let tr = crate::linalg::trace_re(&indefinite);
        assert!(trace_norm(&indefinite) > tr.abs() + 1e-6);
    }
}
