//! Experiment configuration: a strict JSON schema, validation, and expansion
//! of the sweep axes into concrete grid points.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{Shots, MAX_QUBITS};
use crate::noise::NoiseSpec;
use crate::qstate::{StateFamily, StateKind};
use crate::rule::Rule;
use crate::solvers::SolverOptions;

/// Measurement counts, given directly or as sampling ratios `R = m/d²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MGrid {
    Counts(Vec<usize>),
    Ratios(Vec<f64>),
}

impl MGrid {
    /// `64, 128, ..., 1024` style grid.
    pub fn step(start: usize, stop: usize, step: usize) -> Self {
        MGrid::Counts((start..=stop).step_by(step).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            MGrid::Counts(v) => v.len(),
            MGrid::Ratios(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concrete counts for `n` qubits. Ratios round to the nearest integer.
    pub fn resolve(&self, n: usize) -> Vec<usize> {
        match self {
            MGrid::Counts(v) => v.clone(),
            MGrid::Ratios(v) => {
                let d2 = (1usize << (2 * n)) as f64;
                v.iter().map(|r| (r * d2).round() as usize).collect()
            }
        }
    }

    fn ratio(&self, idx: usize) -> Option<f64> {
        match self {
            MGrid::Counts(_) => None,
            MGrid::Ratios(v) => Some(v[idx]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Regularized { tau1: Rule, tau2: Rule },
    /// `beta` scales the true corruption ℓ1 norm into the budget.
    Constrained { beta: f64, delta: f64 },
    Penalized { lambda1: Rule, lambda2: Rule, delta: f64 },
    MatrixLasso { mu: Rule },
}

impl EstimatorSpec {
    pub fn regularized(tau1: &str, tau2: &str) -> Result<Self> {
        Ok(EstimatorSpec::Regularized {
            tau1: Rule::parse(tau1)?,
            tau2: Rule::parse(tau2)?,
        })
    }

    pub fn matrix_lasso(mu: &str) -> Result<Self> {
        Ok(EstimatorSpec::MatrixLasso { mu: Rule::parse(mu)? })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Regularized { .. } => "regularized",
            EstimatorSpec::Constrained { .. } => "constrained",
            EstimatorSpec::Penalized { .. } => "penalized",
            EstimatorSpec::MatrixLasso { .. } => "matrix_lasso",
        }
    }

    fn validate(&self, grid: &[usize]) -> Result<()> {
        let positive = |name: &str, rule: &Rule| -> Result<()> {
            for &m in grid {
                let x = rule.eval(m);
                if !(x > 0.0) || !x.is_finite() {
                    return Err(Error::Config(format!(
                        "{} rule {name} = \"{rule}\" gives {x} at m = {m}",
                        self.name()
                    )));
                }
            }
            Ok(())
        };
        let nonneg = |name: &str, x: f64| -> Result<()> {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::Config(format!("{} {name} = {x} must be nonnegative", self.name())));
            }
            Ok(())
        };
        match self {
            EstimatorSpec::Regularized { tau1, tau2 } => {
                positive("tau1", tau1)?;
                positive("tau2", tau2)
            }
            EstimatorSpec::Constrained { beta, delta } => {
                nonneg("beta", *beta)?;
                nonneg("delta", *delta)
            }
            EstimatorSpec::Penalized { lambda1, lambda2, delta } => {
                positive("lambda1", lambda1)?;
                positive("lambda2", lambda2)?;
                nonneg("delta", *delta)
            }
            EstimatorSpec::MatrixLasso { mu } => positive("mu", mu),
        }
    }
}

/// One swept dimension. The experiment grid is the m-grid times the
/// cartesian product of all axes, in the order given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepAxis {
    /// Sparsity ratio; replaces the noise sparsity rule by `floor(eta*m)`.
    Eta(Vec<f64>),
    /// σ, λ or δ₀ depending on the noise kind.
    NoiseLevel(Vec<f64>),
    #[serde(rename = "N")]
    Shots(Vec<Shots>),
    Noise(Vec<NoiseSpec>),
    Estimator(Vec<EstimatorSpec>),
    Rank(Vec<usize>),
    Qubits(Vec<usize>),
}

impl SweepAxis {
    fn len(&self) -> usize {
        match self {
            SweepAxis::Eta(v) | SweepAxis::NoiseLevel(v) => v.len(),
            SweepAxis::Shots(v) => v.len(),
            SweepAxis::Noise(v) => v.len(),
            SweepAxis::Estimator(v) => v.len(),
            SweepAxis::Rank(v) | SweepAxis::Qubits(v) => v.len(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            SweepAxis::Eta(_) => "eta",
            SweepAxis::NoiseLevel(_) => "noise_level",
            SweepAxis::Shots(_) => "N",
            SweepAxis::Noise(_) => "noise",
            SweepAxis::Estimator(_) => "estimator",
            SweepAxis::Rank(_) => "rank",
            SweepAxis::Qubits(_) => "qubits",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub state: StateFamily,
    pub n: usize,
    #[serde(rename = "N")]
    pub shots: Shots,
    pub m_grid: MGrid,
    pub runs: usize,
    pub noise: NoiseSpec,
    /// Explicit bounded noise `z`, added on top of shot noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_spec: Option<NoiseSpec>,
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    pub seed: u64,
    /// Worker threads; absent means one per available core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

/// Fully resolved settings shared by every m of one sweep combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub index: usize,
    pub n: usize,
    pub state: StateFamily,
    pub shots: Shots,
    pub noise: NoiseSpec,
    /// Set when an eta axis overrides the sparsity rule.
    pub eta: Option<f64>,
    pub estimator: EstimatorSpec,
}

/// One grid point: a variant at a particular measurement count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub variant: Variant,
    pub m_index: usize,
    pub m: usize,
    pub ratio: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.experiment_id.trim().is_empty() {
            return bad("experiment_id must not be empty".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.m_grid.is_empty() {
            return bad("m_grid must not be empty".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        self.solver.validate().map_err(|e| Error::Config(format!("solver: {e}")))?;
        if let Some(z) = &self.z_spec {
            z.validate()?;
        }
        for axis in &self.sweep {
            if axis.len() == 0 {
                return bad(format!("sweep axis {} has no values", axis.name()));
            }
        }
        for (i, axis) in self.sweep.iter().enumerate() {
            if self.sweep[..i].iter().any(|a| a.name() == axis.name()) {
                return bad(format!("sweep axis {} appears twice", axis.name()));
            }
        }
        for v in self.variants() {
            self.validate_variant(&v)?;
        }
        Ok(())
    }

    fn validate_variant(&self, v: &Variant) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        if v.n == 0 || v.n > MAX_QUBITS {
            return Err(Error::Config(format!("n = {} outside [1, {MAX_QUBITS}]", v.n)));
        }
        v.state.validate(v.n).map_err(cfg)?;
        if let MGrid::Ratios(rs) = &self.m_grid {
            if let Some(r) = rs.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
                return Err(Error::Config(format!("sampling ratio {r} outside (0, 1]")));
            }
        }
        let grid = self.m_grid.resolve(v.n);
        let max_m = 1usize << (2 * v.n);
        if let Some(m) = grid.iter().find(|m| **m == 0 || **m > max_m) {
            return Err(Error::Config(format!("m = {m} outside [1, {max_m}] for n = {}", v.n)));
        }
        v.noise.validate().map_err(cfg)?;
        for &m in &grid {
            v.noise.sparsity(m).map_err(cfg)?;
        }
        if let Some(eta) = v.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::Config(format!("eta {eta} outside [0, 1]")));
            }
        }
        v.estimator.validate(&grid)
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn variants(&self) -> Vec<Variant> {
        let base = Variant {
            index: 0,
            n: self.n,
            state: self.state.clone(),
            shots: self.shots,
            noise: self.noise.clone(),
            eta: None,
            estimator: self.estimator.clone(),
        };
        let mut out = vec![base];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for v in &out {
                for k in 0..axis.len() {
                    let mut w = v.clone();
                    match axis {
                        SweepAxis::Eta(xs) => {
                            w.eta = Some(xs[k]);
                        }
                        SweepAxis::NoiseLevel(xs) => w.noise = w.noise.with_level(xs[k]),
                        SweepAxis::Shots(xs) => w.shots = xs[k],
                        SweepAxis::Noise(xs) => w.noise = xs[k].clone(),
                        SweepAxis::Estimator(xs) => w.estimator = xs[k].clone(),
                        SweepAxis::Rank(xs) => {
                            w.state.kind = StateKind::RankR;
                            w.state.rank = xs[k];
                        }
                        SweepAxis::Qubits(xs) => w.n = xs[k],
                    }
                    next.push(w);
                }
            }
            out = next;
        }
        for (i, v) in out.iter_mut().enumerate() {
            v.index = i;
            // applied last so an eta axis wins regardless of axis order
            if let Some(eta) = v.eta {
                v.noise = v.noise.with_ratio(eta);
            }
        }
        out
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for v in self.variants() {
            for (m_index, m) in self.m_grid.resolve(v.n).into_iter().enumerate() {
                out.push(GridPoint {
                    variant: v.clone(),
                    m_index,
                    m,
                    ratio: self.m_grid.ratio(m_index),
                });
            }
        }
        out
    }

    pub fn num_rows(&self) -> usize {
        self.runs * self.grid().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            experiment_id: "t".into(),
            state: StateFamily::haar_pure(),
            n: 2,
            shots: Shots::Finite(100),
            m_grid: MGrid::Counts(vec![4, 8]),
            runs: 2,
            noise: NoiseSpec::sparse_gaussian("floor(0.25*m)", 1.0).unwrap(),
            z_spec: None,
            estimator: EstimatorSpec::regularized("0.011*m", "0.16").unwrap(),
            solver: SolverOptions::default(),
            seed: 1,
            parallelism: Some(1),
            sweep: vec![],
        }
    }

    #[test]
    fn json_round_trip() {
        let mut c = base();
        c.sweep = vec![
            SweepAxis::Eta(vec![0.0, 0.5]),
            SweepAxis::Shots(vec![Shots::Finite(10), Shots::Exact]),
        ];
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = base().to_json().replacen("\"runs\"", "\"bogus\": 1, \"runs\"", 1);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let text = base().to_json().replacen("\"tau2\"", "\"tau3\": 1, \"tau2\"", 1);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn validation_catches_bad_grid() {
        let mut c = base();
        c.m_grid = MGrid::Counts(vec![17]);
        assert!(c.validate().is_err());
        c.m_grid = MGrid::Counts(vec![0]);
        assert!(c.validate().is_err());
        let mut c = base();
        c.runs = 0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.estimator = EstimatorSpec::regularized("0.011*(m-8)", "0.16").unwrap();
        assert!(c.validate().is_err());
        let mut c = base();
        c.sweep = vec![SweepAxis::Rank(vec![5])];
        assert!(c.validate().is_err());
    }

    #[test]
    fn variants_are_cartesian_in_order() {
        let mut c = base();
        c.sweep = vec![SweepAxis::NoiseLevel(vec![1.0, 2.0]), SweepAxis::Eta(vec![0.0, 0.25, 0.5])];
        let vs = c.variants();
        assert_eq!(vs.len(), 6);
        assert_eq!(vs[1].eta, Some(0.25));
        assert_eq!(vs[3].noise.level(), 2.0);
        assert_eq!(vs[5].noise.sparsity(8).unwrap(), 4);
        assert_eq!(c.num_rows(), 2 * 6 * 2);
    }

    #[test]
    fn ratios_resolve_per_qubit_count() {
        let g = MGrid::Ratios(vec![0.375]);
        assert_eq!(g.resolve(5), vec![384]);
        assert_eq!(g.resolve(6), vec![1536]);
        assert_eq!(MGrid::step(64, 1024, 64).len(), 16);
    }
}
