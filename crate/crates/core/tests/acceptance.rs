//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails. The n = 7 check only runs with `--ignored` or
//! `--include-ignored`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use csqst::harness::{preset, run_experiment, EstimatorSpec, ExperimentConfig, MGrid, ResultRow, SweepAxis};
use csqst::linalg::{self, CMatrix};
use csqst::measurement::{acquire, expectation, sample_paulis, MeasurementPlan, Shots};
use csqst::metrics::fidelity;
use csqst::noise::{sparse_gaussian, NoiseSpec};
use csqst::qstate::{haar_random_pure, w_state, DensityMatrix};
use csqst::solvers::*;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const RUNS: usize = 60;

struct Gate {
    passed: usize,
    failed: Vec<String>,
}

impl Gate {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(name.to_string());
        }
    }
}

fn runs(name: &str, runs: usize, grid: Vec<usize>) -> ExperimentConfig {
    let mut c = preset(name).unwrap();
    c.runs = runs;
    c.m_grid = MGrid::Counts(grid);
    c
}

fn execute(c: &ExperimentConfig) -> Vec<ResultRow> {
    let t = Instant::now();
    let rows = run_experiment(c).unwrap();
    let bad = rows.iter().filter(|r| !r.converged).count();
    println!(
        "     ({}: {} rows in {:.1}s, {bad} not converged)",
        c.experiment_id,
        rows.len(),
        t.elapsed().as_secs_f64()
    );
    rows
}

/// Mean of `f` over every row matching `keep`, converged or not.
fn mean(rows: &[ResultRow], keep: impl Fn(&ResultRow) -> bool, f: impl Fn(&ResultRow) -> f64) -> f64 {
    let xs: Vec<f64> = rows.iter().filter(|r| keep(r)).map(f).collect();
    assert!(!xs.is_empty(), "no rows selected");
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn fid(r: &ResultRow) -> f64 {
    r.fidelity
}

fn mse(r: &ResultRow) -> f64 {
    r.mse
}

fn gaussian(r: &ResultRow) -> bool {
    r.noise_kind == "sparse_gaussian"
}

fn fig2b(g: &mut Gate) {
    let cfg = runs("fig2b", RUNS, (384..=1024).step_by(64).collect());
    let t = Instant::now();
    let rows = execute(&cfg);
    let per_row = t.elapsed().as_secs_f64() / rows.len() as f64;
    for kind in ["sparse_gaussian", "sparse_poisson"] {
        let at = |m: usize, f: fn(&ResultRow) -> f64| mean(&rows, |r| r.noise_kind == kind && r.m == m, f);
        let f1024 = at(1024, fid);
        let min_f = (448..=1024).step_by(64).map(|m| at(m, fid)).fold(f64::INFINITY, f64::min);
        let max_e = (384..=1024).step_by(64).map(|m| at(m, mse)).fold(0.0, f64::max);
        g.record(
            &format!("fig2b reproduction ({kind})"),
            (0.965..=1.0).contains(&f1024) && min_f >= 0.94 && max_e <= 5e-3,
            format!(
                "F(1024) = {f1024:.4} in [0.965, 1]; min F(m >= 448) = {min_f:.4} >= 0.94; max MSE(m >= 384) = {max_e:.2e} <= 5e-3"
            ),
        );
    }
    // the full preset has 16 m values x 2 noise kinds x 120 runs; the sampled
    // rows cover the expensive end of the grid so this is an upper estimate
    let full = per_row * 16.0 * 2.0 * 120.0;
    g.record(
        "fig2b runtime",
        full <= 1800.0,
        format!("extrapolated full preset {full:.0}s <= 1800s on this machine"),
    );
    let f384 = mean(&rows, |r| gaussian(r) && r.m == 384, fid);
    g.record(
        "37.5% sampling (n=5, N=100, m=384)",
        f384 >= 0.94,
        format!("mean F = {f384:.4} >= 0.94 over {RUNS} runs"),
    );
}

fn copy_count(g: &mut Gate) {
    let mut cfg = runs("fig2b", RUNS, vec![384]);
    cfg.sweep = vec![SweepAxis::Shots([50, 100, 150, 200].map(Shots::Finite).to_vec())];
    let rows = execute(&cfg);
    let fs: Vec<f64> = [50, 100, 150, 200]
        .iter()
        .map(|&n| mean(&rows, |r| r.shots == Shots::Finite(n), fid))
        .collect();
    let drops: Vec<f64> = fs.windows(2).map(|w| w[0] - w[1]).filter(|d| *d > 0.0).collect();
    let ok = drops.is_empty() || (drops.len() == 1 && drops[0] <= 0.005);
    g.record(
        "copy-count trend at m=384",
        ok,
        format!("F(N=50,100,150,200) = {fs:.4?}; inversions {drops:.4?}"),
    );
}

fn sparsity_sweep(g: &mut Gate) {
    let mut cfg = preset("fig3").unwrap();
    cfg.runs = RUNS;
    let rows = execute(&cfg);
    let SweepAxis::Eta(etas) = &cfg.sweep[0] else { unreachable!() };
    let fs: Vec<f64> = etas.iter().map(|&e| mean(&rows, |r| r.eta == e, fid)).collect();
    let low = etas
        .iter()
        .zip(&fs)
        .filter(|(e, _)| **e <= 0.12 + 1e-12)
        .map(|(_, f)| *f)
        .fold(f64::INFINITY, f64::min);
    let (rho, p) = common::spearman(etas, &fs);
    g.record(
        "sparsity sweep (m=512, N=100)",
        low >= 0.94 && rho < 0.0 && p < 0.01,
        format!("min F(eta <= 0.12) = {low:.4} >= 0.94; Spearman rho = {rho:.3}, p = {p:.1e} < 0.01"),
    );
}

fn robustness(g: &mut Gate) {
    let mut cfg = preset("fig4").unwrap();
    cfg.runs = RUNS;
    let rows = execute(&cfg);
    let at = |kind: &str, level: f64| mean(&rows, |r| r.noise_kind == kind && r.sigma_or_lambda == level, fid);
    let f0 = at("sparse_gaussian", 0.0);
    let SweepAxis::NoiseLevel(levels) = &cfg.sweep[1] else { unreachable!() };
    let min_all = ["sparse_gaussian", "sparse_poisson"]
        .iter()
        .flat_map(|k| levels.iter().map(move |l| (k, l)))
        .map(|(k, l)| at(k, *l))
        .fold(f64::INFINITY, f64::min);
    let gap = (at("sparse_gaussian", 1.0) - at("sparse_poisson", 1.0)).abs();
    g.record(
        "robustness (m=512, N=100)",
        (0.95..=0.99).contains(&f0) && min_all >= 0.93 && gap <= 0.03,
        format!("F(sigma=0) = {f0:.4} in [0.95, 0.99]; min F over grid = {min_all:.4} >= 0.93; |F_gauss - F_poisson| at 1 = {gap:.4} <= 0.03"),
    );
}

fn rank(g: &mut Gate) {
    let cfg = runs("fig5b", RUNS, vec![1024]);
    let rows = execute(&cfg);
    let f2 = mean(&rows, |r| r.rank == 2, fid);
    let f3 = mean(&rows, |r| r.rank == 3, fid);
    g.record(
        "rank robustness (N=200, m=1024)",
        f2 >= 0.95 && (0.85..=0.93).contains(&f3),
        format!("rank-2 F = {f2:.4} >= 0.95; rank-3 F = {f3:.4} in [0.85, 0.93]"),
    );
}

fn depolarizing(g: &mut Gate) {
    let rows = execute(&runs("fig6b", RUNS, vec![640]));
    let f = mean(&rows, |_| true, fid);
    let e = mean(&rows, |_| true, mse);
    g.record(
        "depolarizing (N=200, gamma=0.01, m=640)",
        f >= 0.94 && e <= 4e-3,
        format!("F = {f:.4} >= 0.94; MSE = {e:.2e} <= 4e-3"),
    );
}

fn n_convergence(g: &mut Gate) {
    let mut cfg = preset("figN").unwrap();
    cfg.runs = RUNS;
    let rows = execute(&cfg);
    let ns = [100u64, 215, 464, 1000, 2154, 4642];
    let fs: Vec<f64> = ns.iter().map(|&n| mean(&rows, |r| r.shots == Shots::Finite(n), fid)).collect();
    let e_last = mean(&rows, |r| r.shots == Shots::Finite(4642), mse);
    let last = *fs.last().unwrap();
    g.record(
        "N-convergence (m=512)",
        last > fs[0] && last >= 0.985 && e_last <= 2e-3,
        format!("F(N) = {fs:.4?}; F(4642) = {last:.4} >= 0.985; MSE(4642) = {e_last:.2e} <= 2e-3"),
    );
}

fn relative_error(g: &mut Gate) {
    let mut cfg = preset("figE").unwrap();
    cfg.runs = RUNS;
    let rows = execute(&cfg);
    let SweepAxis::NoiseLevel(levels) = &cfg.sweep[0] else { unreachable!() };
    let l2: Vec<f64> = levels
        .iter()
        .map(|&s| mean(&rows, |r| r.sigma_or_lambda == s, |r| r.rel_l2.unwrap()))
        .collect();
    let decreasing = l2.windows(2).all(|w| w[1] < w[0]);
    let last = *l2.last().unwrap();
    g.record(
        "relative error decay (sigma = 2^-2 .. 2^7)",
        decreasing && last <= 1e-2,
        format!("L2 = {}; strictly decreasing = {decreasing}; L2(2^7) = {last:.2e} <= 1e-2", l2.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")),
    );
}

fn larger(g: &mut Gate, slow: bool) {
    let mut cfg = preset("figF").unwrap();
    cfg.m_grid = MGrid::Ratios(vec![0.375]);
    cfg.sweep.clear();
    let rows = execute(&cfg);
    let f6 = mean(&rows, |_| true, fid);
    g.record(
        "larger systems n=6 (R=0.375, 20 runs)",
        f6 >= 0.94,
        format!("F = {f6:.4} >= 0.94"),
    );
    if slow {
        cfg.n = 7;
        let rows = execute(&cfg);
        let f7 = mean(&rows, |_| true, fid);
        g.record(
            "larger systems n=7 (R=0.375, 20 runs)",
            f7 >= 0.93,
            format!("F = {f7:.4} >= 0.93"),
        );
    } else {
        println!("SKIP larger systems n=7: slow, run with -- --ignored");
    }
}

fn appendix_estimators(g: &mut Gate) {
    let a = execute(&runs("figA", RUNS, vec![576]));
    let b = execute(&runs("figB", RUNS, vec![640]));
    let (fa, fb) = (mean(&a, |_| true, fid), mean(&b, |_| true, fid));
    let (ea, eb) = (mean(&a, |_| true, mse), mean(&b, |_| true, mse));
    g.record(
        "constrained/penalized estimators",
        fa >= 0.93 && fb >= 0.94 && ea <= 1e-2 && eb <= 1e-2,
        format!("figA F(576) = {fa:.4} >= 0.93, MSE {ea:.2e}; figB F(640) = {fb:.4} >= 0.94, MSE {eb:.2e}; MSEs <= 1e-2"),
    );
}

fn baseline(g: &mut Gate) {
    let grid: Vec<usize> = (512..=1024).step_by(64).collect();
    let mut cfg = runs("figG", RUNS, grid.clone());
    let SweepAxis::Noise(noises) = cfg.sweep[0].clone() else { unreachable!() };
    let lasso = EstimatorSpec::matrix_lasso("0.011*m").unwrap();
    let regularized = cfg.estimator.clone();
    cfg.sweep = vec![SweepAxis::Noise(noises.clone())];
    cfg.estimator = lasso;
    let lasso_rows = execute(&cfg);
    let larger = noises
        .iter()
        .filter(|n| matches!(n, NoiseSpec::BoundedSparse { .. }))
        .fold(0.0f64, |a, n| a.max(n.level()));
    cfg.sweep.clear();
    cfg.noise = NoiseSpec::bounded_sparse("floor(0.04*m)", larger).unwrap();
    cfg.estimator = regularized;
    let cs_rows = execute(&cfg);

    let mut margins = Vec::new();
    let mut best_case = true;
    for &m in &grid {
        let cs = mean(&cs_rows, |r| r.m == m, fid);
        let ls = mean(&lasso_rows, |r| r.m == m && r.eta == 0.04 && r.sigma_or_lambda == larger, fid);
        margins.push(cs - ls);
        let clean = mean(&lasso_rows, |r| r.m == m && r.noise_kind == "none", fid);
        let others = mean_max(&lasso_rows, m);
        best_case &= clean >= others;
    }
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    g.record(
        "baseline comparison (eta=0.04, larger delta0)",
        worst >= 0.03 && best_case,
        format!(
            "delta0 = {larger}; min over m >= 512 of F_cs - F_lasso = {worst:.4} >= 0.03; lasso v=0 best at every m = {best_case}"
        ),
    );
}

/// Best Lasso fidelity at `m` among the corrupted settings.
fn mean_max(rows: &[ResultRow], m: usize) -> f64 {
    let mut keys: Vec<(u64, u64)> = rows
        .iter()
        .filter(|r| r.m == m && r.noise_kind != "none")
        .map(|r| (r.eta.to_bits(), r.sigma_or_lambda.to_bits()))
        .collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|&(e, s)| mean(rows, |r| r.m == m && r.eta.to_bits() == e && r.sigma_or_lambda.to_bits() == s, fid))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn solver_properties(g: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    let mut prox_err = 0.0f64;
    for _ in 0..5 {
        let m = random_hermitian(4, &mut rng);
        let got = prox_trace_psd(&m, 0.3).unwrap();
        prox_err = prox_err.max((got - common::prox_trace_psd_oracle(&m, 0.3)).norm());
        let x: Vec<f64> = (0..30).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        for (a, b) in soft_threshold(&x, 0.16).iter().zip(common::soft_threshold_oracle(&x, 0.16)) {
            prox_err = prox_err.max((a - b).abs());
        }
        for (a, b) in project_l1_ball(&x, 5.0).iter().zip(common::project_l1_oracle(&x, 5.0)) {
            prox_err = prox_err.max((a - b).abs());
        }
    }
    check(prox_err <= 1e-7, "prox oracles");

    let (mut adj_err, mut gram_err) = (0.0f64, 0.0f64);
    for n in 1..=5 {
        let m = (1usize << (2 * n)).min(200);
        let plan = sample_paulis(n, m, &mut rng).unwrap();
        let x = random_hermitian(plan.dim(), &mut rng);
        let c: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let lhs: f64 = plan.apply_map(&x).unwrap().iter().zip(&c).map(|(a, b)| a * b).sum();
        let rhs = linalg::frobenius_dot(&x, &plan.adjoint_map(&c).unwrap());
        adj_err = adj_err.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
        let back = plan.apply_map(&plan.adjoint_map(&c).unwrap()).unwrap();
        let d = plan.dim() as f64;
        gram_err = gram_err.max(back.iter().zip(&c).map(|(b, c)| (b - d * c).abs()).fold(0.0, f64::max));
    }
    check(adj_err <= 1e-10, "adjoint identity");
    check(gram_err <= 1e-10, "A A* = d I");

    let mut obj_rel = 0.0f64;
    let mut kkt_max = 0.0f64;
    let mut monotone = true;
    for seed in 0..2u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rho = haar_random_pure(2, &mut r).unwrap();
        let plan = sample_paulis(2, 12 + seed as usize, &mut r).unwrap();
        let v = sparse_gaussian(plan.len(), 1, 1.0, &mut r).unwrap();
        let rec = acquire(&plan, &rho, Shots::Finite(100), &v.values, None, &mut r).unwrap();
        let (_, _, f_or) = common::regularized_pg_oracle(&plan, &rec.y, 0.05, 0.16, 1_000_000);
        let res = solve_regularized(&rec, 0.05, 0.16, &SolverOptions::default()).unwrap();
        obj_rel = obj_rel.max((res.final_objective() - f_or).abs() / f_or.abs());
    }
    check(obj_rel <= 1e-6, "n=2 oracle objective");

    for seed in 0..10u64 {
        let mut r = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 1 + (seed as usize % 4);
        let m = (1usize << (2 * n)) * 3 / 4;
        let rho = haar_random_pure(n, &mut r).unwrap();
        let plan = sample_paulis(n, m, &mut r).unwrap();
        let v = sparse_gaussian(m, m / 10, 1.0, &mut r).unwrap();
        let rec = acquire(&plan, &rho, Shots::Finite(100), &v.values, None, &mut r).unwrap();
        let tau1 = 0.011 * m as f64;
        for res in [
            solve_regularized(&rec, tau1, 0.16, &SolverOptions::default()).unwrap(),
            solve_matrix_lasso(&rec, tau1, &SolverOptions::default()).unwrap(),
        ] {
            if res.converged {
                kkt_max = kkt_max.max(res.kkt_residual);
            } else {
                kkt_max = f64::INFINITY;
            }
            monotone &= res.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        }
        let res = solve_regularized(&rec, tau1, 0.16, &SolverOptions::default()).unwrap();
        kkt_max = kkt_max.max(kkt_residual_regularized(&res.rho_raw, &res.v_hat, &rec, tau1, 0.16).unwrap());
    }
    check(kkt_max <= 1e-6, "KKT on converged solves");
    check(monotone, "objective monotone");

    let mut w_exact = true;
    for n in 2..=8 {
        let z: csqst::PauliString = "Z".repeat(n).parse().unwrap();
        w_exact &= expectation(&z, &w_state(n).unwrap()).unwrap() == -1.0;
    }
    check(w_exact, "W-state all-Z = -1");

    let mut fid_err = 0.0f64;
    for n in 1..=4 {
        let d = 1usize << n;
        let rho = haar_random_pure(n, &mut rng).unwrap();
        fid_err = fid_err.max((fidelity(&rho, &rho).unwrap() - 1.0).abs());
        fid_err = fid_err.max((fidelity(&rho, &DensityMatrix::maximally_mixed(d)).unwrap() - 1.0 / d as f64).abs());
        let mut a = DVector::zeros(d);
        let mut b = DVector::zeros(d);
        a[0] = Complex64::new(1.0, 0.0);
        b[d - 1] = Complex64::new(1.0, 0.0);
        let (pa, pb) = (DensityMatrix::pure(&a).unwrap(), DensityMatrix::pure(&b).unwrap());
        fid_err = fid_err.max(fidelity(&pa, &pb).unwrap());
    }
    check(fid_err <= 1e-9, "fidelity closed forms");

    let plan = MeasurementPlan::full(1).unwrap();
    let mut zero = DVector::zeros(2);
    zero[0] = Complex64::new(1.0, 0.0);
    let rho0 = DensityMatrix::pure(&zero).unwrap();
    let rec = acquire(&plan, &rho0, Shots::Exact, &[0.0; 4], None, &mut rng).unwrap();
    let res = solve_regularized(&rec, 0.044, 0.16, &SolverOptions::default()).unwrap();
    check(
        res.v_hat.iter().all(|v| *v == 0.0) && fidelity(&rho0, &res.rho_hat).unwrap() >= 0.99,
        "single-qubit example",
    );

    let secs = start.elapsed().as_secs_f64();
    check(secs < 120.0, "under 2 minutes");
    g.record(
        "solver property suite",
        failures.is_empty(),
        format!(
            "prox err {prox_err:.1e}; adjoint {adj_err:.1e}; gram {gram_err:.1e}; oracle rel {obj_rel:.1e}; max KKT {kkt_max:.1e}; monotone {monotone}; W exact {w_exact}; fidelity err {fid_err:.1e}; {secs:.1}s{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    );
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let slow = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut g = Gate {
        passed: 0,
        failed: Vec::new(),
    };
    solver_properties(&mut g);
    fig2b(&mut g);
    copy_count(&mut g);
    sparsity_sweep(&mut g);
    robustness(&mut g);
    rank(&mut g);
    depolarizing(&mut g);
    n_convergence(&mut g);
    relative_error(&mut g);
    larger(&mut g, slow);
    appendix_estimators(&mut g);
    baseline(&mut g);
    println!(
        "acceptance: {} passed, {} failed in {:.0}s",
        g.passed,
        g.failed.len(),
        start.elapsed().as_secs_f64()
    );
    if g.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", g.failed.join("; "));
        ExitCode::FAILURE
    }
}
