use std::fmt;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::plan::MeasurementPlan;
use crate::error::{Error, Result};
use crate::qstate::DensityMatrix;

/// Copies of the state spent per Pauli setting. `Exact` is the N → ∞ limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shots {
    Finite(u64),
    Exact,
}

impl Shots {
    pub fn count(&self) -> Option<u64> {
        match self {
            Shots::Finite(n) => Some(*n),
            Shots::Exact => None,
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Finite(n) => write!(f, "{n}"),
            Shots::Exact => f.write_str("exact"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Finite(n) => serializer.serialize_u64(*n),
            Shots::Exact => serializer.serialize_str("exact"),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Count(0) => Err(serde::de::Error::custom("shots must be at least 1")),
            Raw::Count(n) => Ok(Shots::Finite(n)),
            Raw::Word(w) if w == "exact" => Ok(Shots::Exact),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "shots must be a positive integer or \"exact\", got \"{w}\""
            ))),
        }
    }
}

/// Mean of `copies` ±1 outcomes with `p(+1) = (1 + mu) / 2`, sampled as one
/// binomial count.
pub fn simulate_shots<R: Rng + ?Sized>(mu: f64, copies: u64, rng: &mut R) -> Result<f64> {
    if copies == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    if !(mu.abs() <= 1.0 + 1e-9) {
        return Err(Error::invalid(format!("expectation {mu} outside [-1, 1]")));
    }
    let p = ((1.0 + mu) / 2.0).clamp(0.0, 1.0);
    let k = Binomial::new(copies, p)
        .map_err(|e| Error::invalid(e.to_string()))?
        .sample(rng);
    Ok((2.0 * k as f64 - copies as f64) / copies as f64)
}

/// Everything produced by one acquisition: `y = shot_estimates + v + z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRecord {
    pub plan: MeasurementPlan,
    pub true_expectations: Vec<f64>,
    pub shots_per_setting: Shots,
    pub shot_estimates: Vec<f64>,
    pub v_true: Vec<f64>,
    pub z_true: Vec<f64>,
    pub y: Vec<f64>,
}

impl MeasurementRecord {
    pub fn m(&self) -> usize {
        self.plan.len()
    }

    pub fn dim(&self) -> usize {
        self.plan.dim()
    }

    /// Same plan and truth with the data vector replaced; used by tests and
    /// by callers that assemble `y` themselves.
    pub fn with_data(&self, y: Vec<f64>) -> Result<Self> {
        check_len(self.m(), y.len())?;
        Ok(MeasurementRecord { y, ..self.clone() })
    }

    /// Record built straight from a data vector with no ground truth.
    pub fn from_data(plan: MeasurementPlan, y: Vec<f64>) -> Result<Self> {
        check_len(plan.len(), y.len())?;
        let m = plan.len();
        Ok(MeasurementRecord {
            plan,
            true_expectations: vec![0.0; m],
            shots_per_setting: Shots::Exact,
            shot_estimates: y.clone(),
            v_true: vec![0.0; m],
            z_true: vec![0.0; m],
            y,
        })
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Measures every planned setting on `rho` and assembles `y = M̂(ρ) + v + z`.
/// A missing `z` is the zero vector, leaving shot noise as the only
/// unstructured noise.
pub fn acquire<R: Rng + ?Sized>(
    plan: &MeasurementPlan,
    rho: &DensityMatrix,
    shots: Shots,
    v: &[f64],
    z: Option<&[f64]>,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let m = plan.len();
    check_len(m, v.len())?;
    if let Some(z) = z {
        check_len(m, z.len())?;
    }
    let true_expectations = plan.apply_map(rho.matrix())?;
    let shot_estimates = match shots {
        Shots::Exact => true_expectations.clone(),
        Shots::Finite(n) => plan
            .paulis()
            .iter()
            .zip(&true_expectations)
            .map(|(p, &mu)| {
                if p.is_identity() {
                    Ok(1.0)
                } else {
                    simulate_shots(mu, n, rng)
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let z_true = z.map_or_else(|| vec![0.0; m], <[f64]>::to_vec);
    let y = shot_estimates
        .iter()
        .zip(v)
        .zip(&z_true)
        .map(|((s, v), z)| s + v + z)
        .collect();
    Ok(MeasurementRecord {
        plan: plan.clone(),
        true_expectations,
        shots_per_setting: shots,
        shot_estimates,
        v_true: v.to_vec(),
        z_true,
        y,
    })
}
