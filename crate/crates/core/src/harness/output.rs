//! CSV tables and aggregation.
//!
//! `results.csv` header:
//! `experiment_id,run_index,n,rank,m,N,eta,noise_kind,sigma_or_lambda,estimator,fidelity,mse,rel_l2,iterations,converged,degenerate_flag,wall_time_seconds,seed`
//!
//! `aggregate.csv` header:
//! `experiment_id,n,rank,m,N,eta,noise_kind,sigma_or_lambda,estimator,fidelity_mean,fidelity_std,fidelity_sem,mse_mean,mse_std,mse_sem,rel_l2_mean,count,failures`

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::runner::ResultRow;
use crate::error::{Error, Result};
use crate::measurement::Shots;

pub const RESULTS_HEADER: &[&str] = &[
    "experiment_id",
    "run_index",
    "n",
    "rank",
    "m",
    "N",
    "eta",
    "noise_kind",
    "sigma_or_lambda",
    "estimator",
    "fidelity",
    "mse",
    "rel_l2",
    "iterations",
    "converged",
    "degenerate_flag",
    "wall_time_seconds",
    "seed",
];

pub const AGGREGATE_HEADER: &[&str] = &[
    "experiment_id",
    "n",
    "rank",
    "m",
    "N",
    "eta",
    "noise_kind",
    "sigma_or_lambda",
    "estimator",
    "fidelity_mean",
    "fidelity_std",
    "fidelity_sem",
    "mse_mean",
    "mse_std",
    "mse_sem",
    "rel_l2_mean",
    "count",
    "failures",
];

/// Summary of one grid point. Statistics cover converged rows only; rows that
/// hit the iteration cap are counted in `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment_id: String,
    pub n: usize,
    pub rank: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub shots: Shots,
    pub eta: f64,
    pub noise_kind: String,
    pub sigma_or_lambda: f64,
    pub estimator: String,
    pub fidelity_mean: Option<f64>,
    pub fidelity_std: Option<f64>,
    pub fidelity_sem: Option<f64>,
    pub mse_mean: Option<f64>,
    pub mse_std: Option<f64>,
    pub mse_sem: Option<f64>,
    pub rel_l2_mean: Option<f64>,
    pub count: usize,
    pub failures: usize,
}

/// Orders floats the way `f64::total_cmp` does.
fn float_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    b ^ (((b >> 63) as u64) >> 1) as i64
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    experiment_id: String,
    estimator: String,
    noise_kind: String,
    n: usize,
    rank: usize,
    shots: u64,
    level: i64,
    eta: i64,
    m: usize,
}

impl Key {
    fn of(r: &ResultRow) -> Self {
        Key {
            experiment_id: r.experiment_id.clone(),
            estimator: r.estimator.clone(),
            noise_kind: r.noise_kind.clone(),
            n: r.n,
            rank: r.rank,
            shots: r.shots.count().unwrap_or(u64::MAX),
            level: float_key(r.sigma_or_lambda),
            eta: float_key(r.eta),
            m: r.m,
        }
    }
}

/// Mean, sample standard deviation (n - 1) and standard error. A single
/// value has std 0.
pub fn summarize(xs: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    Some((mean, std, std / n.sqrt()))
}

/// Groups rows by grid point. Output order and values do not depend on the
/// input order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<Key, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(Key::of(r)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|mut group| {
            group.sort_by(|a, b| {
                a.run_index
                    .cmp(&b.run_index)
                    .then(a.fidelity.total_cmp(&b.fidelity))
                    .then(a.mse.total_cmp(&b.mse))
            });
            let ok: Vec<&ResultRow> = group.iter().copied().filter(|r| r.converged).collect();
            let fid: Vec<f64> = ok.iter().map(|r| r.fidelity).collect();
            let err: Vec<f64> = ok.iter().map(|r| r.mse).collect();
            let rel: Vec<f64> = ok.iter().filter_map(|r| r.rel_l2).collect();
            let f = summarize(&fid);
            let e = summarize(&err);
            let first = group[0];
            AggregateRow {
                experiment_id: first.experiment_id.clone(),
                n: first.n,
                rank: first.rank,
                m: first.m,
                shots: first.shots,
                eta: first.eta,
                noise_kind: first.noise_kind.clone(),
                sigma_or_lambda: first.sigma_or_lambda,
                estimator: first.estimator.clone(),
                fidelity_mean: f.map(|s| s.0),
                fidelity_std: f.map(|s| s.1),
                fidelity_sem: f.map(|s| s.2),
                mse_mean: e.map(|s| s.0),
                mse_std: e.map(|s| s.1),
                mse_sem: e.map(|s| s.2),
                rel_l2_mean: summarize(&rel).map(|s| s.0),
                count: ok.len(),
                failures: group.len() - ok.len(),
            }
        })
        .collect()
}

fn write_table<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_table<T: DeserializeOwned>(header: &[&str], path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        let missing: Vec<&str> = header.iter().copied().filter(|h| !found.iter().any(|f| f == h)).collect();
        return Err(Error::Config(format!(
            "{}: unexpected header (missing columns: {})",
            path.display(),
            if missing.is_empty() { "none, order differs".to_string() } else { missing.join(", ") }
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_table(rows, RESULTS_HEADER, path)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_table(RESULTS_HEADER, path)
}

pub fn write_aggregates(rows: &[AggregateRow], path: &Path) -> Result<()> {
    write_table(rows, AGGREGATE_HEADER, path)
}

pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateRow>> {
    read_table(AGGREGATE_HEADER, path)
}

/// Grid-point lookup helper used by reports and tests.
pub fn find(aggs: &[AggregateRow], pred: impl Fn(&AggregateRow) -> bool) -> Vec<&AggregateRow> {
    let mut out: Vec<&AggregateRow> = aggs.iter().filter(|a| pred(a)).collect();
    out.sort_by(|a, b| a.m.cmp(&b.m).then(a.eta.partial_cmp(&b.eta).unwrap_or(Ordering::Equal)));
    out
}
