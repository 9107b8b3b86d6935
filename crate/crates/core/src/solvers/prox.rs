//! Exact proximal maps and Euclidean projections used by every solver.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};

/// Tolerance on the Hermitian check of public prox inputs.
pub const PROX_HERMITIAN_TOL: f64 = 1e-9;

/// `argmin_X ½‖X - M‖_F² + t·Tr(X)` over `X ⪰ 0`: shift the spectrum down by
/// `t` and clip at zero.
pub fn prox_trace_psd(m: &CMatrix, t: f64) -> Result<CMatrix> {
    linalg::ensure_hermitian(m, PROX_HERMITIAN_TOL)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("prox weight {t} must be nonnegative")));
    }
    Ok(shrink_psd(m, t).0)
}

/// Unchecked form of [`prox_trace_psd`]; also returns the trace of the result.
pub(crate) fn shrink_psd(m: &CMatrix, t: f64) -> (CMatrix, f64) {
    let eig = HermitianEigen::new(&linalg::hermitize(m));
    let trace = eig.values.iter().map(|l| (l - t).max(0.0)).sum();
    (eig.map_values(|l| (l - t).max(0.0)), trace)
}

/// Componentwise `sign(x)·max(|x| - t, 0)`.
pub fn soft_threshold(x: &[f64], t: f64) -> Vec<f64> {
    x.iter().map(|&v| soft(v, t)).collect()
}

#[inline]
pub(crate) fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Euclidean projection onto `{u : ‖u‖₁ ≤ radius}` by sorting magnitudes and
/// locating the soft-threshold level.
pub fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    if radius <= 0.0 {
        return vec![0.0; x.len()];
    }
    if linalg::l1_norm(x) <= radius {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    soft_threshold(x, theta)
}

/// Radial projection onto `{u : ‖u‖₂ ≤ radius}`.
pub fn project_l2_ball(x: &[f64], radius: f64) -> Vec<f64> {
    let norm = linalg::l2_norm(x);
    if norm <= radius {
        return x.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; x.len()];
    }
    let k = radius / norm;
    x.iter().map(|v| v * k).collect()
}
