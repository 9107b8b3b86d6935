use std::collections::HashSet;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pauli::{sign, PauliString, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qstate::DensityMatrix;

/// An ordered list of distinct Pauli settings on `n` qubits; defines the
/// sampling map `X ↦ (Tr(P_k X))_k` and its adjoint `c ↦ Σ_k c_k P_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanJson", into = "PlanJson")]
pub struct MeasurementPlan {
    n: usize,
    paulis: Vec<PauliString>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanJson {
    n: usize,
    paulis: Vec<PauliString>,
}

impl TryFrom<PlanJson> for MeasurementPlan {
    type Error = Error;
    fn try_from(raw: PlanJson) -> Result<Self> {
        MeasurementPlan::new(raw.n, raw.paulis)
    }
}

impl From<MeasurementPlan> for PlanJson {
    fn from(plan: MeasurementPlan) -> Self {
        PlanJson {
            n: plan.n,
            paulis: plan.paulis,
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!("qubit count {n} outside [1, {MAX_QUBITS}]")));
    }
    Ok(())
}

impl MeasurementPlan {
    pub fn new(n: usize, paulis: Vec<PauliString>) -> Result<Self> {
        check_qubits(n)?;
        if paulis.is_empty() {
            return Err(Error::invalid("measurement plan is empty"));
        }
        let mut seen = HashSet::with_capacity(paulis.len());
        for p in &paulis {
            if p.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: p.num_qubits(),
                });
            }
            if !seen.insert(*p) {
                return Err(Error::invalid(format!("duplicate Pauli setting {p}")));
            }
        }
        Ok(MeasurementPlan { n, paulis })
    }

    /// All `4^n` settings in index order.
    pub fn full(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let paulis = (0..1usize << (2 * n))
            .map(|i| PauliString::from_index(n, i))
            .collect::<Result<_>>()?;
        Ok(MeasurementPlan { n, paulis })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }

    pub fn paulis(&self) -> &[PauliString] {
        &self.paulis
    }

    pub fn position(&self, p: &PauliString) -> Option<usize> {
        self.paulis.iter().position(|q| q == p)
    }

    fn check_matrix(&self, x: &CMatrix) -> Result<()> {
        let d = self.dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.nrows().max(x.ncols()),
            });
        }
        Ok(())
    }

    /// `[M(X)]_k = Re Tr(P_k X)`.
    pub fn apply_map(&self, x: &CMatrix) -> Result<Vec<f64>> {
        self.check_matrix(x)?;
        let mut out = vec![0.0; self.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &CMatrix, out: &mut [f64]) {
        let d = self.dim();
        let data = x.as_slice();
        for (k, p) in self.paulis.iter().enumerate() {
            out[k] = trace_product(p, data, d).re;
        }
    }

    /// `Σ_k c_k P_k`.
    pub fn adjoint_map(&self, c: &[f64]) -> Result<CMatrix> {
        if c.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: c.len(),
            });
        }
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        self.adjoint_into(c, &mut out);
        Ok(out)
    }

    pub(crate) fn adjoint_into(&self, c: &[f64], out: &mut CMatrix) {
        let d = self.dim();
        out.fill(Complex64::new(0.0, 0.0));
        let data = out.as_mut_slice();
        for (p, &ck) in self.paulis.iter().zip(c) {
            if ck == 0.0 {
                continue;
            }
            let (xm, zm) = (p.x_mask(), p.z_mask());
            let ph = p.phase() * ck;
            for l in 0..d {
                // column-major: entry (l ^ xm, l)
                data[l * d + (l ^ xm)] += ph * sign(l & zm);
            }
        }
    }
}

/// Neumaier-compensated running sum, so that e.g. the W-state all-Z
/// expectation sums to exactly -1.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// `Tr(P X)` for column-major `X` data, using one nonzero per Pauli column.
#[inline]
fn trace_product(p: &PauliString, data: &[Complex64], d: usize) -> Complex64 {
    let (xm, zm) = (p.x_mask(), p.z_mask());
    let (mut re, mut im) = (Compensated::default(), Compensated::default());
    for l in 0..d {
        // P[l^xm, l] * X[l, l^xm]
        let v = data[(l ^ xm) * d + l];
        if (l & zm).count_ones() % 2 == 0 {
            re.add(v.re);
            im.add(v.im);
        } else {
            re.add(-v.re);
            im.add(-v.im);
        }
    }
    Complex64::new(re.value(), im.value()) * p.phase()
}

/// `Tr(P ρ)`; real for Hermitian `ρ`.
pub fn expectation(p: &PauliString, rho: &DensityMatrix) -> Result<f64> {
    if p.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: rho.dim(),
        });
    }
    let v = trace_product(p, rho.matrix().as_slice(), rho.dim()).re;
    debug_assert!(v.abs() <= 1.0 + 1e-9, "expectation {v} outside [-1, 1]");
    Ok(v)
}

/// `Tr(P X)` via the dense Kronecker matrix; used to cross-check the fast path.
pub fn expectation_dense(p: &PauliString, x: &CMatrix) -> Complex64 {
    (p.matrix() * x).trace()
}

/// Draws `m` distinct settings uniformly without replacement, in random order.
pub fn sample_paulis<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<MeasurementPlan> {
    check_qubits(n)?;
    let total = 1usize << (2 * n);
    if m == 0 || m > total {
        return Err(Error::invalid(format!("m = {m} outside [1, {total}] for n = {n}")));
    }
    let paulis = rand::seq::index::sample(rng, total, m)
        .into_iter()
        .map(|i| PauliString::from_index(n, i))
        .collect::<Result<_>>()?;
    Ok(MeasurementPlan { n, paulis })
}
