//! Quantum states used as experiment inputs: Haar-random pure states, random
//! rank-r mixed states (induced measure), the W state, and the local
//! depolarizing channel.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

/// A d×d Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        linalg::ensure_hermitian(&matrix, HERMITIAN_TOL)?;
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!("dimension {dim} is not a power of two")));
        }
        let tr = linalg::trace_re(&matrix);
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(format!("trace {tr} is not 1")));
        }
        let eig = HermitianEigen::new(&matrix);
        if eig.min_value() < -PSD_TOL {
            return Err(Error::NotPsd(eig.min_value()));
        }
        Ok(DensityMatrix { matrix })
    }

    pub(crate) fn from_raw(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a vector that is normalized here.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("state vector has zero norm"));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Ok(DensityMatrix::from_raw(&psi * psi.adjoint()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix::from_raw(linalg::identity(dim) * Complex64::new(1.0 / dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        linalg::frobenius_norm_sq(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        HermitianEigen::new(&self.matrix).values
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityMatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|i| (0..d).map(|j| f(&self.matrix[(i, j)])).collect()).collect()
        };
        DensityMatrixJson {
            dim: d,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DensityMatrixJson::deserialize(deserializer)?;
        let d = raw.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&raw.re) || !shape_ok(&raw.im) {
            return Err(D::Error::custom(format!("expected {d}x{d} `re` and `im` arrays")));
        }
        let m = CMatrix::from_fn(d, d, |i, j| Complex64::new(raw.re[i][j], raw.im[i][j]));
        DensityMatrix::new(m).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    HaarPure,
    RankR,
    WState,
}

/// Which input state to draw for each run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFamily {
    pub kind: StateKind,
    #[serde(default = "one")]
    pub rank: usize,
    #[serde(default)]
    pub depolarizing_gamma: f64,
}

fn one() -> usize {
    1
}

impl StateFamily {
    pub fn haar_pure() -> Self {
        StateFamily {
            kind: StateKind::HaarPure,
            rank: 1,
            depolarizing_gamma: 0.0,
        }
    }

    pub fn rank_r(rank: usize) -> Self {
        StateFamily {
            kind: StateKind::RankR,
            rank,
            depolarizing_gamma: 0.0,
        }
    }

    pub fn w_state() -> Self {
        StateFamily {
            kind: StateKind::WState,
            rank: 1,
            depolarizing_gamma: 0.0,
        }
    }

    pub fn with_depolarizing(mut self, gamma: f64) -> Self {
        self.depolarizing_gamma = gamma;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("qubit count must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.depolarizing_gamma) {
            return Err(Error::invalid(format!(
                "depolarizing gamma {} outside [0, 1]",
                self.depolarizing_gamma
            )));
        }
        match self.kind {
            StateKind::RankR if self.rank == 0 || self.rank > 1 << n => Err(Error::invalid(format!(
                "rank {} outside [1, {}]",
                self.rank,
                1usize << n
            ))),
            StateKind::WState if n < 2 => Err(Error::invalid("W state needs at least 2 qubits")),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DensityMatrix> {
        self.validate(n)?;
        let rho = match self.kind {
            StateKind::HaarPure => haar_random_pure(n, rng)?,
            StateKind::RankR => random_rank_r(n, self.rank, rng)?,
            StateKind::WState => w_state(n)?,
        };
        if self.depolarizing_gamma > 0.0 {
            apply_local_depolarizing(&rho, self.depolarizing_gamma)
        } else {
            Ok(rho)
        }
    }
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

fn dim_for(n: usize) -> Result<usize> {
    if n == 0 || n > 16 {
        return Err(Error::invalid(format!("qubit count {n} outside [1, 16]")));
    }
    Ok(1 << n)
}

/// Haar-random pure state on `n` qubits, from a normalized complex Gaussian vector.
pub fn haar_random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = dim_for(n)?;
    DensityMatrix::pure(&gaussian_vector(d, rng))
}

/// Random rank-`r` state: a Haar pure state on `2^n · r` with the `r`-dimensional
/// ancilla traced out.
pub fn random_rank_r<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = dim_for(n)?;
    if r == 0 || r > d {
        return Err(Error::invalid(format!("rank {r} outside [1, {d}]")));
    }
    let mut psi = gaussian_vector(d * r, rng);
    let norm = psi.norm();
    psi /= Complex64::new(norm, 0.0);
    partial_trace(&psi, d, r)
}

/// `(1/√n) Σ_i |0…1_i…0⟩`.
pub fn w_state(n: usize) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::invalid("W state needs at least 2 qubits"));
    }
    let d = dim_for(n)?;
    // entries set to 1/n directly so Pauli expectations come out exact
    let w = Complex64::new(1.0 / n as f64, 0.0);
    let mut rho = CMatrix::zeros(d, d);
    for a in 0..n {
        for b in 0..n {
            rho[(1 << a, 1 << b)] = w;
        }
    }
    Ok(DensityMatrix::from_raw(rho))
}

/// Traces out the trailing `drop`-dimensional factor of a vector on `keep · drop`.
pub fn partial_trace(psi: &DVector<Complex64>, keep: usize, drop: usize) -> Result<DensityMatrix> {
    if psi.len() != keep * drop {
        return Err(Error::DimensionMismatch {
            expected: keep * drop,
            actual: psi.len(),
        });
    }
    let m = CMatrix::from_fn(keep, keep, |i, j| {
        (0..drop)
            .map(|a| psi[i * drop + a] * psi[j * drop + a].conj())
            .sum()
    });
    Ok(DensityMatrix::from_raw(m))
}

/// Applies `E(ρ) = γ I/2 + (1-γ) ρ` independently on every qubit.
pub fn apply_local_depolarizing(rho: &DensityMatrix, gamma: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("depolarizing gamma {gamma} outside [0, 1]")));
    }
    let mut m = rho.matrix().clone();
    if gamma == 0.0 {
        return Ok(DensityMatrix::from_raw(m));
    }
    let d = rho.dim();
    for q in 0..rho.num_qubits() {
        let bit = 1usize << q;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut val = m[(i, j)] * (1.0 - gamma);
                if (i & bit) == (j & bit) {
                    // (I/2 ⊗ Tr_q ρ)[i, j]
                    let avg = m[(i & !bit, j & !bit)] + m[(i | bit, j | bit)];
                    val += avg * (gamma * 0.5);
                }
                out[(i, j)] = val;
            }
        }
        m = out;
    }
    Ok(DensityMatrix::from_raw(m))
}
