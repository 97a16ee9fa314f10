//! C ABI for the isoadmm solvers.
//!
//! Instances and reports are opaque heap handles created and released by the
//! `*_new` / `*_free` pairs. Every fallible call returns an [`IsoStatus`];
//! the message for the most recent failure on the calling thread is
//! available from [`iso_last_error`]. Node indices are 0-based.
//!
//! The header `include/isoadmm.h` is regenerated by cbindgen on every build.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use isoadmm::{dag, oracle, smooth, DagInstance, Error, Init, RunReport, SmoothInstance, SolverConfig, Status};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Capacity = 3,
    Internal = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

/// Termination reason of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoRunStatus {
    Converged = 0,
    MaxIterReached = 1,
    Diverged = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoInit {
    FromObservations = 0,
    Zeros = 1,
}

/// Plain-data solver settings; obtain defaults from [`iso_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoSolverConfig {
    pub rho: f64,
    pub max_iter: usize,
    pub tol_factor: f64,
    pub divergence_bound: f64,
    pub init: IsoInit,
    pub threads: usize,
}

impl From<&IsoSolverConfig> for SolverConfig {
    fn from(c: &IsoSolverConfig) -> Self {
        SolverConfig {
            rho: c.rho,
            max_iter: c.max_iter,
            tol_factor: c.tol_factor,
            divergence_bound: c.divergence_bound,
            init: match c.init {
                IsoInit::FromObservations => Init::FromObservations,
                IsoInit::Zeros => Init::Zeros,
            },
            threads: c.threads,
        }
    }
}

/// Opaque smoothed-chain instance.
pub struct IsoSmoothInstance(SmoothInstance);

/// Opaque DAG instance.
pub struct IsoDagInstance(DagInstance);

/// Opaque solve result.
pub struct IsoReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: IsoStatus, msg: impl Into<String>) -> IsoStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> IsoStatus {
    let status = match e {
        Error::Input(_) | Error::Json(_) | Error::Io(_) => IsoStatus::InvalidInput,
        Error::Capacity(_) => IsoStatus::Capacity,
        Error::Internal(_) => IsoStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> IsoStatus) -> IsoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(IsoStatus::Panic, "panic inside isoadmm"),
    }
}

/// Reads `len` doubles, or `None` if `ptr` is null while `len > 0`.
unsafe fn read_f64(ptr: *const f64, len: usize) -> Option<Vec<f64>> {
    if len == 0 {
        return Some(Vec::new());
    }
    if ptr.is_null() {
        return None;
    }
    Some(slice::from_raw_parts(ptr, len).to_vec())
}

unsafe fn read_usize(ptr: *const usize, len: usize) -> Option<Vec<usize>> {
    if len == 0 {
        return Some(Vec::new());
    }
    if ptr.is_null() {
        return None;
    }
    Some(slice::from_raw_parts(ptr, len).to_vec())
}

/// Weights pointer may be null, meaning unit weights.
unsafe fn read_weights(ptr: *const f64, len: usize) -> Vec<f64> {
    if ptr.is_null() {
        vec![1.0; len]
    } else {
        slice::from_raw_parts(ptr, len).to_vec()
    }
}

unsafe fn write_out(out: *mut f64, cap: usize, values: &[f64]) -> IsoStatus {
    if values.is_empty() {
        return IsoStatus::Ok;
    }
    if out.is_null() {
        return fail(IsoStatus::NullPointer, "output buffer is null");
    }
    if cap < values.len() {
        return fail(
            IsoStatus::BufferTooSmall,
            format!("output buffer holds {cap} values, need {}", values.len()),
        );
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    IsoStatus::Ok
}

/// Message describing the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iso_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iso_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn iso_config_default() -> IsoSolverConfig {
    let c = SolverConfig::default();
    IsoSolverConfig {
        rho: c.rho,
        max_iter: c.max_iter,
        tol_factor: c.tol_factor,
        divergence_bound: c.divergence_bound,
        init: IsoInit::FromObservations,
        threads: c.threads,
    }
}

/// Creates a smoothed-chain instance. `w` may be NULL for unit weights.
///
/// # Safety
/// `x` (and `w` when non-null) must point to `n` readable doubles; `out`
/// must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn iso_smooth_instance_new(
    x: *const f64,
    w: *const f64,
    n: usize,
    lambda: f64,
    out: *mut *mut IsoSmoothInstance,
) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return fail(IsoStatus::NullPointer, "out is null");
        }
        let Some(x) = read_f64(x, n) else {
            return fail(IsoStatus::NullPointer, "x is null");
        };
        let w = read_weights(w, n);
        match SmoothInstance::new(x, w, lambda) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(IsoSmoothInstance(inst)));
                IsoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `inst` must be NULL or a handle from [`iso_smooth_instance_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_smooth_instance_free(inst: *mut IsoSmoothInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Creates a DAG instance with `m` edges `tails[k] -> heads[k]`, each
/// requiring `alpha[tails[k]] <= alpha[heads[k]]`. `w` may be NULL.
///
/// # Safety
/// `y` (and `w` when non-null) must point to `n` readable doubles, `tails`
/// and `heads` to `m` readable `size_t` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_dag_instance_new(
    y: *const f64,
    w: *const f64,
    n: usize,
    tails: *const usize,
    heads: *const usize,
    m: usize,
    out: *mut *mut IsoDagInstance,
) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return fail(IsoStatus::NullPointer, "out is null");
        }
        let Some(y) = read_f64(y, n) else {
            return fail(IsoStatus::NullPointer, "y is null");
        };
        let (Some(tails), Some(heads)) = (read_usize(tails, m), read_usize(heads, m)) else {
            return fail(IsoStatus::NullPointer, "edge arrays are null");
        };
        let w = read_weights(w, n);
        let edges = tails.into_iter().zip(heads).collect();
        match DagInstance::new(y, w, edges) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(IsoDagInstance(inst)));
                IsoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `inst` must be NULL or a handle from [`iso_dag_instance_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_dag_instance_free(inst: *mut IsoDagInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Runs the chain solver. `cfg` may be NULL for defaults.
///
/// # Safety
/// `inst` must be a live handle, `cfg` NULL or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iso_solve_smooth(
    inst: *const IsoSmoothInstance,
    cfg: *const IsoSolverConfig,
    out: *mut *mut IsoReport,
) -> IsoStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(IsoStatus::NullPointer, "instance or out is null");
        }
        let cfg = cfg.as_ref().map_or_else(SolverConfig::default, SolverConfig::from);
        match smooth::solve(&(*inst).0, &cfg) {
            Ok(rep) => {
                *out = Box::into_raw(Box::new(IsoReport(rep)));
                IsoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Runs the DAG solver. `cfg` may be NULL for defaults.
///
/// # Safety
/// `inst` must be a live handle, `cfg` NULL or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iso_solve_dag(
    inst: *const IsoDagInstance,
    cfg: *const IsoSolverConfig,
    out: *mut *mut IsoReport,
) -> IsoStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(IsoStatus::NullPointer, "instance or out is null");
        }
        let cfg = cfg.as_ref().map_or_else(SolverConfig::default, SolverConfig::from);
        match dag::solve(&(*inst).0, &cfg) {
            Ok(rep) => {
                *out = Box::into_raw(Box::new(IsoReport(rep)));
                IsoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `report` must be NULL or a handle from a solve call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_report_free(report: *mut IsoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_report_status(report: *const IsoReport) -> IsoRunStatus {
    match (*report).0.status {
        Status::Converged => IsoRunStatus::Converged,
        Status::MaxIterReached => IsoRunStatus::MaxIterReached,
        Status::Diverged => IsoRunStatus::Diverged,
    }
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_report_iterations(report: *const IsoReport) -> usize {
    (*report).0.iterations
}

/// Number of fitted values.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_report_len(report: *const IsoReport) -> usize {
    (*report).0.solution.len()
}

/// Final primal residual, dual residual, tolerance and objective. Any output
/// pointer may be NULL.
///
/// # Safety
/// `report` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_report_summary(
    report: *const IsoReport,
    final_r: *mut f64,
    final_s: *mut f64,
    epsilon: *mut f64,
    objective: *mut f64,
) -> IsoStatus {
    if report.is_null() {
        return fail(IsoStatus::NullPointer, "report is null");
    }
    let rep = &(*report).0;
    for (dst, v) in [
        (final_r, rep.final_r),
        (final_s, rep.final_s),
        (epsilon, rep.epsilon),
        (objective, rep.objective),
    ] {
        if !dst.is_null() {
            *dst = v;
        }
    }
    IsoStatus::Ok
}

/// Copies the fitted values into `out`, which must hold `iso_report_len`.
///
/// # Safety
/// `report` must be a live handle; `out` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn iso_report_copy_solution(
    report: *const IsoReport,
    out: *mut f64,
    cap: usize,
) -> IsoStatus {
    if report.is_null() {
        return fail(IsoStatus::NullPointer, "report is null");
    }
    write_out(out, cap, &(*report).0.solution)
}

/// Copies the per-iteration primal residual, dual residual and objective
/// (one entry per iteration, `iso_report_iterations` of them). Any output
/// pointer may be NULL to skip that column.
///
/// # Safety
/// `report` must be a live handle; non-null outputs need room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn iso_report_copy_trace(
    report: *const IsoReport,
    r: *mut f64,
    s: *mut f64,
    objective: *mut f64,
    cap: usize,
) -> IsoStatus {
    if report.is_null() {
        return fail(IsoStatus::NullPointer, "report is null");
    }
    let trace = &(*report).0.trace;
    if cap < trace.len() {
        return fail(
            IsoStatus::BufferTooSmall,
            format!("trace buffers hold {cap} rows, need {}", trace.len()),
        );
    }
    for (col, get) in [
        (r, (|t: &isoadmm::TraceRecord| t.r) as fn(&isoadmm::TraceRecord) -> f64),
        (s, |t| t.s),
        (objective, |t| t.objective),
    ] {
        if !col.is_null() {
            for (k, t) in trace.iter().enumerate() {
                *col.add(k) = get(t);
            }
        }
    }
    IsoStatus::Ok
}

/// JSON encoding of the full report. Release with [`iso_string_free`].
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_report_to_json(report: *const IsoReport) -> *mut c_char {
    if report.is_null() {
        set_error("report is null");
        return ptr::null_mut();
    }
    match serde_json::to_string(&(*report).0) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Classic weighted isotonic regression by pool-adjacent-violators.
/// `w` may be NULL for unit weights; `out` receives `n` values.
///
/// # Safety
/// `x` (and `w` when non-null) must hold `n` doubles, `out` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn iso_pav(x: *const f64, w: *const f64, n: usize, out: *mut f64) -> IsoStatus {
    guard(|| {
        let Some(x) = read_f64(x, n) else {
            return fail(IsoStatus::NullPointer, "x is null");
        };
        let w = read_weights(w, n);
        match oracle::pav(&x, &w) {
            Ok(v) => write_out(out, n, &v),
            Err(e) => from_error(e),
        }
    })
}

/// Exact solution of a small chain instance by active-set enumeration.
/// `kkt_residual` may be NULL.
///
/// # Safety
/// `inst` must be a live handle; `out` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn iso_exact_smooth(
    inst: *const IsoSmoothInstance,
    out: *mut f64,
    cap: usize,
    kkt_residual: *mut f64,
) -> IsoStatus {
    guard(|| {
        if inst.is_null() {
            return fail(IsoStatus::NullPointer, "instance is null");
        }
        match oracle::exact_smooth(&(*inst).0) {
            Ok(sol) => {
                if !kkt_residual.is_null() {
                    *kkt_residual = sol.kkt_residual;
                }
                write_out(out, cap, &sol.values)
            }
            Err(e) => from_error(e),
        }
    })
}

/// Exact solution of a small DAG instance by active-set enumeration.
///
/// # Safety
/// `inst` must be a live handle; `out` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn iso_exact_dag(
    inst: *const IsoDagInstance,
    out: *mut f64,
    cap: usize,
    kkt_residual: *mut f64,
) -> IsoStatus {
    guard(|| {
        if inst.is_null() {
            return fail(IsoStatus::NullPointer, "instance is null");
        }
        match oracle::exact_dag(&(*inst).0) {
            Ok(sol) => {
                if !kkt_residual.is_null() {
                    *kkt_residual = sol.kkt_residual;
                }
                write_out(out, cap, &sol.values)
            }
            Err(e) => from_error(e),
        }
    })
}
