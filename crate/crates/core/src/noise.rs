//! Structured corruption `v` (sparse Gaussian, sparse Poisson, ℓ2-bounded
//! sparse) and unstructured noise `z` (Gaussian direction scaled to an ℓ2
//! budget).

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::l2_norm;
use crate::rule::{guarded_floor, Rule};

/// A generated noise vector and the support it was drawn on.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    pub values: Vec<f64>,
    pub support: Vec<usize>,
}

fn check_sparsity(m: usize, s: usize) -> Result<()> {
    if s > m {
        return Err(Error::invalid(format!("sparsity {s} exceeds length {m}")));
    }
    Ok(())
}

fn draw_support<R: Rng + ?Sized>(m: usize, s: usize, rng: &mut R) -> Vec<usize> {
    rand::seq::index::sample(rng, m, s).into_vec()
}

/// `s = ⌊η m⌋`.
pub fn sparsity_from_ratio(eta: f64, m: usize) -> usize {
    guarded_floor(eta * m as f64).max(0.0) as usize
}

/// `s` entries i.i.d. `N(0, σ²)` on a uniform support; zeros elsewhere.
pub fn sparse_gaussian<R: Rng + ?Sized>(m: usize, s: usize, sigma: f64, rng: &mut R) -> Result<NoiseSample> {
    check_sparsity(m, s)?;
    if !(sigma >= 0.0) {
        return Err(Error::invalid(format!("sigma {sigma} must be nonnegative")));
    }
    let support = draw_support(m, s, rng);
    let mut values = vec![0.0; m];
    for &i in &support {
        let g: f64 = rng.sample(StandardNormal);
        values[i] = sigma * g;
    }
    Ok(NoiseSample { values, support })
}

/// `s` raw Poisson(λ) counts on a uniform support; `centered` subtracts λ.
pub fn sparse_poisson<R: Rng + ?Sized>(
    m: usize,
    s: usize,
    lambda: f64,
    centered: bool,
    rng: &mut R,
) -> Result<NoiseSample> {
    check_sparsity(m, s)?;
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda {lambda} must be nonnegative")));
    }
    let support = draw_support(m, s, rng);
    let mut values = vec![0.0; m];
    if lambda > 0.0 {
        let dist = Poisson::new(lambda).map_err(|e| Error::invalid(e.to_string()))?;
        let shift = if centered { lambda } else { 0.0 };
        for &i in &support {
            values[i] = dist.sample(rng) - shift;
        }
    }
    Ok(NoiseSample { values, support })
}

/// `s`-sparse standard Gaussian rescaled to `‖v‖₂ = δ₀ √s`.
pub fn bounded_sparse<R: Rng + ?Sized>(m: usize, s: usize, delta0: f64, rng: &mut R) -> Result<NoiseSample> {
    check_sparsity(m, s)?;
    if !(delta0 >= 0.0) {
        return Err(Error::invalid(format!("delta0 {delta0} must be nonnegative")));
    }
    if s == 0 && delta0 > 0.0 {
        return Err(Error::invalid("bounded sparse noise needs s >= 1 when delta0 > 0"));
    }
    let mut sample = sparse_gaussian(m, s, 1.0, rng)?;
    let target = delta0 * (s as f64).sqrt();
    rescale(&mut sample.values, target);
    Ok(sample)
}

/// Dense Gaussian direction scaled to `‖z‖₂ = δ`.
pub fn scaled_gaussian_ball<R: Rng + ?Sized>(m: usize, delta: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("delta {delta} must be nonnegative")));
    }
    let mut z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    rescale(&mut z, delta);
    Ok(z)
}

fn rescale(x: &mut [f64], target: f64) {
    let norm = l2_norm(x);
    if target == 0.0 || norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let k = target / norm;
    x.iter_mut().for_each(|v| *v *= k);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    SparseGaussian,
    SparsePoisson,
    BoundedSparse,
    ScaledGaussianBall,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::SparseGaussian => "sparse_gaussian",
            NoiseKind::SparsePoisson => "sparse_poisson",
            NoiseKind::BoundedSparse => "bounded_sparse",
            NoiseKind::ScaledGaussianBall => "scaled_gaussian_ball",
        }
    }
}

/// Noise model as it appears in experiment configs. Sparsity is a rule in `m`
/// (typically `floor(eta*m)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    None,
    SparseGaussian {
        sparsity: Rule,
        sigma: f64,
    },
    SparsePoisson {
        sparsity: Rule,
        lambda: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        centered: bool,
    },
    BoundedSparse {
        sparsity: Rule,
        delta0: f64,
    },
    ScaledGaussianBall {
        delta: f64,
    },
}

impl NoiseSpec {
    pub fn sparse_gaussian(sparsity: &str, sigma: f64) -> Result<Self> {
        Ok(NoiseSpec::SparseGaussian {
            sparsity: Rule::parse(sparsity)?,
            sigma,
        })
    }

    pub fn sparse_poisson(sparsity: &str, lambda: f64) -> Result<Self> {
        Ok(NoiseSpec::SparsePoisson {
            sparsity: Rule::parse(sparsity)?,
            lambda,
            centered: false,
        })
    }

    pub fn bounded_sparse(sparsity: &str, delta0: f64) -> Result<Self> {
        Ok(NoiseSpec::BoundedSparse {
            sparsity: Rule::parse(sparsity)?,
            delta0,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        match self {
            NoiseSpec::None => NoiseKind::None,
            NoiseSpec::SparseGaussian { .. } => NoiseKind::SparseGaussian,
            NoiseSpec::SparsePoisson { .. } => NoiseKind::SparsePoisson,
            NoiseSpec::BoundedSparse { .. } => NoiseKind::BoundedSparse,
            NoiseSpec::ScaledGaussianBall { .. } => NoiseKind::ScaledGaussianBall,
        }
    }

    fn sparsity_rule(&self) -> Option<&Rule> {
        match self {
            NoiseSpec::SparseGaussian { sparsity, .. }
            | NoiseSpec::SparsePoisson { sparsity, .. }
            | NoiseSpec::BoundedSparse { sparsity, .. } => Some(sparsity),
            _ => None,
        }
    }

    /// Nonzero count at length `m`; dense kinds report `m`, `None` reports 0.
    pub fn sparsity(&self, m: usize) -> Result<usize> {
        match self {
            NoiseSpec::None => Ok(0),
            NoiseSpec::ScaledGaussianBall { .. } => Ok(m),
            _ => {
                let raw = self.sparsity_rule().unwrap().eval(m);
                if !raw.is_finite() || raw < 0.0 {
                    return Err(Error::Config(format!("sparsity rule gives {raw} at m = {m}")));
                }
                let s = guarded_floor(raw) as usize;
                check_sparsity(m, s)?;
                Ok(s)
            }
        }
    }

    /// σ, λ, δ₀ or δ, whichever the kind carries.
    pub fn level(&self) -> f64 {
        match self {
            NoiseSpec::None => 0.0,
            NoiseSpec::SparseGaussian { sigma, .. } => *sigma,
            NoiseSpec::SparsePoisson { lambda, .. } => *lambda,
            NoiseSpec::BoundedSparse { delta0, .. } => *delta0,
            NoiseSpec::ScaledGaussianBall { delta } => *delta,
        }
    }

    pub fn with_level(&self, level: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            NoiseSpec::None => {}
            NoiseSpec::SparseGaussian { sigma, .. } => *sigma = level,
            NoiseSpec::SparsePoisson { lambda, .. } => *lambda = level,
            NoiseSpec::BoundedSparse { delta0, .. } => *delta0 = level,
            NoiseSpec::ScaledGaussianBall { delta } => *delta = level,
        }
        out
    }

    /// Replaces the sparsity rule by `floor(eta*m)`.
    pub fn with_ratio(&self, eta: f64) -> Self {
        let mut out = self.clone();
        let rule = Rule::parse(&format!("floor({eta}*m)")).expect("ratio rule");
        match &mut out {
            NoiseSpec::SparseGaussian { sparsity, .. }
            | NoiseSpec::SparsePoisson { sparsity, .. }
            | NoiseSpec::BoundedSparse { sparsity, .. } => *sparsity = rule,
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let level = self.level();
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::Config(format!(
                "{} noise level {level} must be finite and nonnegative",
                self.kind().name()
            )));
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<NoiseSample> {
        let s = self.sparsity(m)?;
        match self {
            NoiseSpec::None => Ok(NoiseSample {
                values: vec![0.0; m],
                support: Vec::new(),
            }),
            NoiseSpec::SparseGaussian { sigma, .. } => sparse_gaussian(m, s, *sigma, rng),
            NoiseSpec::SparsePoisson { lambda, centered, .. } => sparse_poisson(m, s, *lambda, *centered, rng),
            NoiseSpec::BoundedSparse { delta0, .. } => bounded_sparse(m, s, *delta0, rng),
            NoiseSpec::ScaledGaussianBall { delta } => Ok(NoiseSample {
                values: scaled_gaussian_ball(m, *delta, rng)?,
                support: (0..m).collect(),
            }),
        }
    }
}
