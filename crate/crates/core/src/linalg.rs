//! Small dense helpers over `nalgebra` complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues below this are treated as round-off when taking square roots.
pub const PSD_CLIP_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix, eigenvalues in ascending order.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let eig = m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        HermitianEigen { values, vectors }
    }

    /// Eigenvalues below this are rounding noise; their square roots would
    /// otherwise leak `O(√ε)` errors into fidelities.
    pub fn noise_floor(&self) -> f64 {
        let top = self.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        1e-14 * top
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `U f(Λ) U*`, skipping eigenpairs where `f` returns zero.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.vectors.nrows();
        let kept: Vec<(usize, f64)> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &lam)| (i, f(lam)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        let mut scaled = CMatrix::zeros(d, kept.len());
        let mut plain = CMatrix::zeros(d, kept.len());
        for (c, &(i, w)) in kept.iter().enumerate() {
            let col = self.vectors.column(i);
            plain.set_column(c, &col);
            scaled.set_column(c, &(col * Complex64::new(w, 0.0)));
        }
        let out = scaled * plain.adjoint();
        hermitize(&out)
    }
}

/// Largest entrywise deviation `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    ensure_square(m)?;
    let dev = hermitian_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// `(m + m*) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Real part of the Frobenius inner product `Tr(a* b)`.
pub fn frobenius_dot(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frobenius_norm_sq(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn trace_re(a: &CMatrix) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Square root of a PSD matrix; eigenvalues in `[-PSD_CLIP_TOL, 0)` are clipped,
/// anything more negative is an error.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = HermitianEigen::new(&hermitize(m));
    check_psd(&eig)?;
    let floor = eig.noise_floor();
    Ok(eig.map_values(|l| if l > floor { l.sqrt() } else { 0.0 }))
}

pub fn check_psd(eig: &HermitianEigen) -> Result<()> {
    let lo = eig.min_value();
    if lo < -PSD_CLIP_TOL {
        return Err(Error::NotPsd(lo));
    }
    Ok(())
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}
