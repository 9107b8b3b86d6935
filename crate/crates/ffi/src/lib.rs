//! C ABI over `csqst`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Every fallible call returns a `CsqstStatus`; on failure the message is
//! kept per thread and read back with `csqst_last_error_message`.
//! Matrices cross the boundary as separate row-major real and imaginary
//! buffers of length `dim * dim`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use csqst::harness::run_to_dir;
use csqst::linalg::CMatrix;
use csqst::measurement::{acquire, sample_paulis};
use csqst::qstate::{haar_random_pure, random_rank_r, w_state};
use csqst::solvers::{solve_constrained, solve_matrix_lasso, solve_penalized, solve_regularized};
use csqst::{
    fidelity, DensityMatrix, Error, ExperimentConfig, MeasurementPlan, MeasurementRecord, PauliString,
    ReconstructionResult, Shots, SolverOptions,
};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Status returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsqstStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    NotPsd = 5,
    Config = 6,
    Io = 7,
    Serialization = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

pub struct CsqstState(DensityMatrix);
pub struct CsqstPlan(MeasurementPlan);
pub struct CsqstRecord(MeasurementRecord);
pub struct CsqstResult(ReconstructionResult);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CsqstSolverOptions {
    pub max_iters: usize,
    pub rel_obj_tol: f64,
    pub kkt_tol: f64,
    pub admm_rho: f64,
    pub restart: bool,
    pub exact_step: bool,
}

impl From<SolverOptions> for CsqstSolverOptions {
    fn from(o: SolverOptions) -> Self {
        CsqstSolverOptions {
            max_iters: o.max_iters,
            rel_obj_tol: o.rel_obj_tol,
            kkt_tol: o.kkt_tol,
            admm_rho: o.admm_rho,
            restart: o.restart,
            exact_step: o.exact_step,
        }
    }
}

impl From<CsqstSolverOptions> for SolverOptions {
    fn from(o: CsqstSolverOptions) -> Self {
        SolverOptions {
            max_iters: o.max_iters,
            rel_obj_tol: o.rel_obj_tol,
            kkt_tol: o.kkt_tol,
            admm_rho: o.admm_rho,
            restart: o.restart,
            exact_step: o.exact_step,
        }
    }
}

/// Solver diagnostics for a finished reconstruction.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsqstResultInfo {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub final_objective: f64,
    pub converged: bool,
    pub degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

enum Failure {
    Null(&'static str),
    Small { needed: usize, given: usize },
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into_bytes());
}

fn status_of(f: Failure) -> CsqstStatus {
    let (status, msg) = match f {
        Failure::Null(what) => (CsqstStatus::NullPointer, format!("null pointer: {what}")),
        Failure::Small { needed, given } => (
            CsqstStatus::BufferTooSmall,
            format!("buffer too small: need {needed}, got {given}"),
        ),
        Failure::Lib(e) => {
            let status = match &e {
                Error::InvalidArgument(_) => CsqstStatus::InvalidArgument,
                Error::DimensionMismatch { .. } => CsqstStatus::DimensionMismatch,
                Error::NotHermitian(_) => CsqstStatus::NotHermitian,
                Error::NotPsd(_) => CsqstStatus::NotPsd,
                Error::Config(_) | Error::UnknownPreset { .. } => CsqstStatus::Config,
                Error::Io { .. } => CsqstStatus::Io,
                Error::Csv(_) | Error::Json(_) => CsqstStatus::Serialization,
            };
            (status, e.to_string())
        }
    };
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CsqstStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            CsqstStatus::Ok
        }
        Ok(Err(e)) => status_of(e),
        Err(_) => {
            set_error("panic inside csqst".into());
            CsqstStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, needed: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return Err(Failure::Small { needed, given: len });
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn options(p: *const CsqstSolverOptions) -> SolverOptions {
    match p.as_ref() {
        Some(o) => (*o).into(),
        None => SolverOptions::default(),
    }
}

unsafe fn copy_matrix(m: &CMatrix, re: *mut f64, im: *mut f64, len: usize) -> Result<(), Failure> {
    let d = m.nrows();
    let re = slice_mut(re, len, d * d, "re")?;
    let im = slice_mut(im, len, d * d, "im")?;
    for i in 0..d {
        for j in 0..d {
            re[i * d + j] = m[(i, j)].re;
            im[i * d + j] = m[(i, j)].im;
        }
    }
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn csqst_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn csqst_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn csqst_solver_options_default() -> CsqstSolverOptions {
    SolverOptions::default().into()
}

/// Haar-random pure state on `n` qubits.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_haar_pure(n: usize, seed: u64, out: *mut *mut CsqstState) -> CsqstStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        put(out, CsqstState(haar_random_pure(n, &mut rng)?))
    })
}

/// Random rank-`r` mixed state on `n` qubits.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_rank_r(n: usize, r: usize, seed: u64, out: *mut *mut CsqstState) -> CsqstStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        put(out, CsqstState(random_rank_r(n, r, &mut rng)?))
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_w(n: usize, out: *mut *mut CsqstState) -> CsqstStatus {
    guard(|| put(out, CsqstState(w_state(n)?)))
}

/// Density matrix from row-major real and imaginary parts. Fails unless the
/// matrix is Hermitian, PSD and of unit trace.
///
/// # Safety
/// `re` and `im` must each point to `dim * dim` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_from_parts(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CsqstState,
) -> CsqstStatus {
    guard(|| {
        let len = dim.checked_mul(dim).ok_or(Error::InvalidArgument("dimension overflow".into()))?;
        let re = slice(re, len, "re")?;
        let im = slice(im, len, "im")?;
        let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(re[i * dim + j], im[i * dim + j]));
        put(out, CsqstState(DensityMatrix::new(m)?))
    })
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_dim(state: *const CsqstState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_copy_matrix(
    state: *const CsqstState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> CsqstStatus {
    guard(|| copy_matrix(get(state, "state")?.0.matrix(), re, im, len))
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csqst_state_free(state: *mut CsqstState) {
    free(state)
}

/// `m` distinct non-identity Pauli strings on `n` qubits, drawn uniformly.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_plan_random(n: usize, m: usize, seed: u64, out: *mut *mut CsqstPlan) -> CsqstStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        put(out, CsqstPlan(sample_paulis(n, m, &mut rng)?))
    })
}

/// Plan from Pauli indices. Index bits `2q` and `2q + 1` hold the x and z
/// parts of qubit `q`'s letter.
///
/// # Safety
/// `indices` must point to `m` readable values.
#[no_mangle]
pub unsafe extern "C" fn csqst_plan_from_indices(
    n: usize,
    indices: *const u64,
    m: usize,
    out: *mut *mut CsqstPlan,
) -> CsqstStatus {
    guard(|| {
        if m > 0 && indices.is_null() {
            return Err(Failure::Null("indices"));
        }
        let idx = if m == 0 { &[][..] } else { std::slice::from_raw_parts(indices, m) };
        let paulis = idx
            .iter()
            .map(|&i| {
                let i = usize::try_from(i).map_err(|_| Error::InvalidArgument(format!("index {i} out of range")))?;
                PauliString::from_index(n, i)
            })
            .collect::<csqst::Result<Vec<_>>>()?;
        put(out, CsqstPlan(MeasurementPlan::new(n, paulis)?))
    })
}

/// Number of settings, or 0 for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csqst_plan_len(plan: *const CsqstPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn csqst_plan_indices(plan: *const CsqstPlan, out: *mut u64, len: usize) -> CsqstStatus {
    guard(|| {
        let plan = &get(plan, "plan")?.0;
        let out = slice_mut(out, len, plan.len(), "out")?;
        for (o, p) in out.iter_mut().zip(plan.paulis()) {
            *o = p.index() as u64;
        }
        Ok(())
    })
}

/// # Safety
/// `plan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csqst_plan_free(plan: *mut CsqstPlan) {
    free(plan)
}

/// Simulates `y = estimate + v + z`. `shots == 0` means exact expectations.
/// `z` may be null for no dense noise.
///
/// # Safety
/// `v` and `z` (when non-null) must point to `m` readable doubles, where
/// `m` is the plan length.
#[no_mangle]
pub unsafe extern "C" fn csqst_record_acquire(
    plan: *const CsqstPlan,
    state: *const CsqstState,
    shots: u64,
    v: *const f64,
    z: *const f64,
    m: usize,
    seed: u64,
    out: *mut *mut CsqstRecord,
) -> CsqstStatus {
    guard(|| {
        let plan = &get(plan, "plan")?.0;
        let state = &get(state, "state")?.0;
        let v = slice(v, m, "v")?;
        let z = if z.is_null() { None } else { Some(slice(z, m, "z")?) };
        let shots = if shots == 0 { Shots::Exact } else { Shots::Finite(shots) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        put(out, CsqstRecord(acquire(plan, state, shots, v, z, &mut rng)?))
    })
}

/// Record holding measured data only, for reconstructing external data.
///
/// # Safety
/// `y` must point to `m` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn csqst_record_from_data(
    plan: *const CsqstPlan,
    y: *const f64,
    m: usize,
    out: *mut *mut CsqstRecord,
) -> CsqstStatus {
    guard(|| {
        let plan = get(plan, "plan")?.0.clone();
        let y = slice(y, m, "y")?.to_vec();
        put(out, CsqstRecord(MeasurementRecord::from_data(plan, y)?))
    })
}

/// # Safety
/// `record` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csqst_record_len(record: *const CsqstRecord) -> usize {
    record.as_ref().map_or(0, |r| r.0.m())
}

/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn csqst_record_copy_y(record: *const CsqstRecord, out: *mut f64, len: usize) -> CsqstStatus {
    guard(|| {
        let y = &get(record, "record")?.0.y;
        slice_mut(out, len, y.len(), "out")?.copy_from_slice(y);
        Ok(())
    })
}

/// # Safety
/// `record` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csqst_record_free(record: *mut CsqstRecord) {
    free(record)
}

unsafe fn solve(
    record: *const CsqstRecord,
    out: *mut *mut CsqstResult,
    f: impl FnOnce(&MeasurementRecord) -> csqst::Result<ReconstructionResult>,
) -> CsqstStatus {
    guard(|| {
        let record = &get(record, "record")?.0;
        put(out, CsqstResult(f(record)?))
    })
}

/// Joint trace and l1 regularized estimator. `opts` may be null for defaults.
///
/// # Safety
/// Handles must be live; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_solve_regularized(
    record: *const CsqstRecord,
    tau1: f64,
    tau2: f64,
    opts: *const CsqstSolverOptions,
    out: *mut *mut CsqstResult,
) -> CsqstStatus {
    let opts = options(opts);
    solve(record, out, |r| solve_regularized(r, tau1, tau2, &opts))
}

/// Trace-regularized least squares ignoring outliers.
///
/// # Safety
/// Handles must be live; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_solve_matrix_lasso(
    record: *const CsqstRecord,
    mu: f64,
    opts: *const CsqstSolverOptions,
    out: *mut *mut CsqstResult,
) -> CsqstStatus {
    let opts = options(opts);
    solve(record, out, |r| solve_matrix_lasso(r, mu, &opts))
}

/// Minimum trace subject to `||v||_1 <= l1_budget` and residual `<= delta`.
///
/// # Safety
/// Handles must be live; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_solve_constrained(
    record: *const CsqstRecord,
    l1_budget: f64,
    delta: f64,
    opts: *const CsqstSolverOptions,
    out: *mut *mut CsqstResult,
) -> CsqstStatus {
    let opts = options(opts);
    solve(record, out, |r| solve_constrained(r, l1_budget, delta, &opts))
}

/// Weighted trace plus l1 subject to residual `<= delta`.
///
/// # Safety
/// Handles must be live; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn csqst_solve_penalized(
    record: *const CsqstRecord,
    lambda1: f64,
    lambda2: f64,
    delta: f64,
    opts: *const CsqstSolverOptions,
    out: *mut *mut CsqstResult,
) -> CsqstStatus {
    let opts = options(opts);
    solve(record, out, |r| solve_penalized(r, lambda1, lambda2, delta, &opts))
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_dim(result: *const CsqstResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.rho_hat.dim())
}

/// Length of the outlier estimate, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_len(result: *const CsqstResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.v_hat.len())
}

/// Copies the normalized estimate.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_copy_rho(
    result: *const CsqstResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> CsqstStatus {
    guard(|| copy_matrix(get(result, "result")?.0.rho_hat.matrix(), re, im, len))
}

/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_copy_v(result: *const CsqstResult, out: *mut f64, len: usize) -> CsqstStatus {
    guard(|| {
        let v = &get(result, "result")?.0.v_hat;
        slice_mut(out, len, v.len(), "out")?.copy_from_slice(v);
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle and `info` writable.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_info(result: *const CsqstResult, info: *mut CsqstResultInfo) -> CsqstStatus {
    guard(|| {
        let r = &get(result, "result")?.0;
        if info.is_null() {
            return Err(Failure::Null("info"));
        }
        *info = CsqstResultInfo {
            iterations: r.iterations,
            kkt_residual: r.kkt_residual,
            final_objective: r.final_objective(),
            converged: r.converged,
            degenerate: r.degenerate,
        };
        Ok(())
    })
}

/// Fidelity between the estimate and `truth`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_fidelity(
    result: *const CsqstResult,
    truth: *const CsqstState,
    out: *mut f64,
) -> CsqstStatus {
    guard(|| {
        let r = &get(result, "result")?.0;
        let t = &get(truth, "truth")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = fidelity(t, &r.rho_hat)?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csqst_result_free(result: *mut CsqstResult) {
    free(result)
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csqst_fidelity(a: *const CsqstState, b: *const CsqstState, out: *mut f64) -> CsqstStatus {
    guard(|| {
        let a = &get(a, "a")?.0;
        let b = &get(b, "b")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = fidelity(a, b)?;
        Ok(())
    })
}

/// Runs an experiment config given as JSON and writes `results.csv`,
/// `aggregate.csv` and `run_meta.json` into `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn csqst_run_config_json(config_json: *const c_char, out_dir: *const c_char) -> CsqstStatus {
    guard(|| {
        let json = text(config_json, "config_json")?;
        let dir = text(out_dir, "out_dir")?;
        let config = ExperimentConfig::from_json(json)?;
        run_to_dir(&config, Path::new(dir))?;
        Ok(())
    })
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}
