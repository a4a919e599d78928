//! C ABI for the product-graph learning pipeline: opaque handles, status
//! codes, and a thread-local last-error message. The generated header lives
//! in `include/prodgraph.h` (regenerate with `cbindgen --config cbindgen.toml`).
//!
//! Ownership rules: every `*_new`/`*_read`/constructor output is owned by
//! the caller and must be released with the matching `*_free`; getter
//! functions copy into caller-provided buffers and never allocate.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;
use prodgraph::error::Error;
use prodgraph::graph::Gamma;
use prodgraph::harness::{self, Method};
use prodgraph::signals::{read_batch, SignalBatch};
use prodgraph::topology::SolverOptions;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgStatus {
    PgOk = 0,
    PgNullArgument = 1,
    PgInvalidArgument = 2,
    PgIoError = 3,
    PgNumericError = 4,
    PgUtf8Error = 5,
    PgBufferTooSmall = 6,
    PgInternalError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> PgStatus {
    match err {
        Error::Io(_) => PgStatus::PgIoError,
        e if e.is_numeric() => PgStatus::PgNumericError,
        _ => PgStatus::PgInvalidArgument,
    }
}

fn fail(err: Error) -> PgStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Opaque signal batch handle.
pub struct PgBatch {
    inner: SignalBatch,
}

/// Opaque learning-result handle.
pub struct PgLearnResult {
    coupling: DMatrix<f64>,
    physical: DMatrix<f64>,
    interaction_support: DMatrix<f64>,
    coupling_objective: f64,
    physical_objective: f64,
    converged: bool,
}

/// Opaque centrality-result handle.
pub struct PgCentralityResult {
    selected_index: usize,
    pos_score: f64,
    cg: Vec<f64>,
    top_nodes: Vec<usize>,
}

/// Library version as a static nul-terminated string; never freed.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message for this thread into `buf` (truncated,
/// always nul-terminated when `cap > 0`). Returns the full message length
/// in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn pg_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> PgStatus {
    if out.is_null() {
        set_error("null output pointer");
        return PgStatus::PgNullArgument;
    }
    *out = Box::into_raw(Box::new(value));
    PgStatus::PgOk
}

/// Reads a signal batch from a CSV file with a `# N=.. M=.. S=..` header.
///
/// # Safety
/// `path` must be a valid nul-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn pg_batch_read_csv(
    path: *const c_char,
    out: *mut *mut PgBatch,
) -> PgStatus {
    if path.is_null() {
        set_error("null path");
        return PgStatus::PgNullArgument;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return PgStatus::PgUtf8Error;
        }
    };
    match read_batch(path) {
        Ok(inner) => write_out(out, PgBatch { inner }),
        Err(e) => fail(e),
    }
}

/// Builds a batch from a row-major `s x (n*m)` buffer; each row is one
/// stacked observation, layer-by-layer.
///
/// # Safety
/// `data` must point to `s * n * m` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_batch_from_rows(
    data: *const f64,
    s: usize,
    n: usize,
    m: usize,
    out: *mut *mut PgBatch,
) -> PgStatus {
    if data.is_null() {
        set_error("null data pointer");
        return PgStatus::PgNullArgument;
    }
    let len = s.checked_mul(n * m);
    let total = match len {
        Some(t) if t > 0 => t,
        _ => {
            set_error("empty or overflowing batch dimensions");
            return PgStatus::PgInvalidArgument;
        }
    };
    let slice = std::slice::from_raw_parts(data, total);
    let samples = DMatrix::from_fn(s, n * m, |i, j| slice[i * n * m + j]);
    match SignalBatch::new(n, m, samples, None) {
        Ok(inner) => write_out(out, PgBatch { inner }),
        Err(e) => fail(e),
    }
}

/// Releases a batch handle. Null is ignored.
///
/// # Safety
/// `batch` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pg_batch_free(batch: *mut PgBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Reports the dimensions `(s, n, m)` of a batch.
///
/// # Safety
/// `batch` must be a live handle; output pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn pg_batch_dims(
    batch: *const PgBatch,
    s: *mut usize,
    n: *mut usize,
    m: *mut usize,
) -> PgStatus {
    let Some(batch) = batch.as_ref() else {
        set_error("null batch");
        return PgStatus::PgNullArgument;
    };
    if !s.is_null() {
        *s = batch.inner.sample_count();
    }
    if !n.is_null() {
        *n = batch.inner.n();
    }
    if !m.is_null() {
        *m = batch.inner.m();
    }
    PgStatus::PgOk
}

fn method_from(raw: c_int) -> Option<Method> {
    match raw {
        0 => Some(Method::Nkd),
        1 => Some(Method::Unfold),
        _ => None,
    }
}

/// Learns both factor adjacency matrices from a batch.
///
/// `method`: 0 = nearest-Kronecker decomposition, 1 = unfolding.
/// Defaults apply when `rho`, `eps` or `thr_frac` are not positive.
///
/// # Safety
/// `batch` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_learn(
    batch: *const PgBatch,
    gamma1: f64,
    method: c_int,
    rho: f64,
    eps: f64,
    thr_frac: f64,
    out: *mut *mut PgLearnResult,
) -> PgStatus {
    let Some(batch) = batch.as_ref() else {
        set_error("null batch");
        return PgStatus::PgNullArgument;
    };
    let Some(method) = method_from(method) else {
        set_error(format!("unknown method code {method}"));
        return PgStatus::PgInvalidArgument;
    };
    let gamma = match Gamma::from_gamma1(gamma1) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let rho = if rho > 0.0 { rho } else { 40.0 };
    let eps = if eps > 0.0 { eps } else { 1e-6 };
    let thr = if thr_frac > 0.0 && thr_frac < 1.0 {
        thr_frac
    } else {
        0.3
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        harness::learn_from_batch(
            &batch.inner,
            gamma,
            method,
            rho,
            eps,
            thr,
            &SolverOptions::default(),
        )
    }));
    match result {
        Ok(Ok(outcome)) => write_out(
            out,
            PgLearnResult {
                coupling: outcome.report_c.a_hat.clone(),
                physical: outcome.report_g.a_hat.clone(),
                interaction_support: outcome.ai_binary.clone(),
                coupling_objective: outcome.report_c.objective,
                physical_objective: outcome.report_g.objective,
                converged: outcome.report_c.converged && outcome.report_g.converged,
            },
        ),
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic during learning");
            PgStatus::PgInternalError
        }
    }
}

/// Releases a learning result. Null is ignored.
///
/// # Safety
/// `r` must be a handle from `pg_learn`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pg_learn_result_free(r: *mut PgLearnResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Reports `(n, m)` for a learning result.
///
/// # Safety
/// `r` must be a live handle; output pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn pg_learn_result_dims(
    r: *const PgLearnResult,
    n: *mut usize,
    m: *mut usize,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    if !n.is_null() {
        *n = r.physical.nrows();
    }
    if !m.is_null() {
        *m = r.coupling.nrows();
    }
    PgStatus::PgOk
}

unsafe fn copy_matrix(mat: &DMatrix<f64>, buf: *mut f64, len: usize) -> PgStatus {
    if buf.is_null() {
        set_error("null buffer");
        return PgStatus::PgNullArgument;
    }
    let need = mat.nrows() * mat.ncols();
    if len < need {
        set_error(format!("buffer holds {len} doubles, need {need}"));
        return PgStatus::PgBufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(buf, need);
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            out[i * mat.ncols() + j] = mat[(i, j)];
        }
    }
    PgStatus::PgOk
}

/// Copies the learned `m x m` coupling adjacency, row-major.
///
/// # Safety
/// `r` must be live; `buf` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_learn_result_coupling(
    r: *const PgLearnResult,
    buf: *mut f64,
    len: usize,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    copy_matrix(&r.coupling, buf, len)
}

/// Copies the learned `n x n` physical adjacency, row-major.
///
/// # Safety
/// `r` must be live; `buf` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_learn_result_physical(
    r: *const PgLearnResult,
    buf: *mut f64,
    len: usize,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    copy_matrix(&r.physical, buf, len)
}

/// Copies the `(n*m) x (n*m)` 0/1 support of the reassembled interaction
/// graph, row-major.
///
/// # Safety
/// `r` must be live; `buf` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_learn_result_interaction_support(
    r: *const PgLearnResult,
    buf: *mut f64,
    len: usize,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    copy_matrix(&r.interaction_support, buf, len)
}

/// Reports solver objectives and convergence for a learning result.
///
/// # Safety
/// `r` must be live; output pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn pg_learn_result_stats(
    r: *const PgLearnResult,
    coupling_objective: *mut f64,
    physical_objective: *mut f64,
    converged: *mut c_int,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    if !coupling_objective.is_null() {
        *coupling_objective = r.coupling_objective;
    }
    if !physical_objective.is_null() {
        *physical_objective = r.physical_objective;
    }
    if !converged.is_null() {
        *converged = r.converged as c_int;
    }
    PgStatus::PgOk
}

/// Detects the top-k central physical nodes from a batch.
///
/// `method`: 0 = nearest-Kronecker decomposition, 1 = unfolding.
///
/// # Safety
/// `batch` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_centrality(
    batch: *const PgBatch,
    method: c_int,
    k: usize,
    out: *mut *mut PgCentralityResult,
) -> PgStatus {
    let Some(batch) = batch.as_ref() else {
        set_error("null batch");
        return PgStatus::PgNullArgument;
    };
    let Some(method) = method_from(method) else {
        set_error(format!("unknown method code {method}"));
        return PgStatus::PgInvalidArgument;
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        harness::centrality_from_batch(&batch.inner, method, k)
    }));
    match result {
        Ok(Ok(outcome)) => write_out(
            out,
            PgCentralityResult {
                selected_index: outcome.selected_index,
                pos_score: outcome.pos_score,
                cg: outcome.cg,
                top_nodes: outcome.top_nodes,
            },
        ),
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic during centrality detection");
            PgStatus::PgInternalError
        }
    }
}

/// Releases a centrality result. Null is ignored.
///
/// # Safety
/// `r` must be a handle from `pg_centrality`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pg_centrality_result_free(r: *mut PgCentralityResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Copies the 0-based indices of the detected nodes (ascending).
///
/// # Safety
/// `r` must be live; `buf` must hold at least `len` entries.
#[no_mangle]
pub unsafe extern "C" fn pg_centrality_result_top_nodes(
    r: *const PgCentralityResult,
    buf: *mut usize,
    len: usize,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    if buf.is_null() {
        set_error("null buffer");
        return PgStatus::PgNullArgument;
    }
    if len < r.top_nodes.len() {
        set_error(format!(
            "buffer holds {len} indices, need {}",
            r.top_nodes.len()
        ));
        return PgStatus::PgBufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(r.top_nodes.as_ptr(), buf, r.top_nodes.len());
    PgStatus::PgOk
}

/// Copies the unit physical centrality vector (length `n`).
///
/// # Safety
/// `r` must be live; `buf` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_centrality_result_vector(
    r: *const PgCentralityResult,
    buf: *mut f64,
    len: usize,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    if buf.is_null() {
        set_error("null buffer");
        return PgStatus::PgNullArgument;
    }
    if len < r.cg.len() {
        set_error(format!("buffer holds {len} doubles, need {}", r.cg.len()));
        return PgStatus::PgBufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(r.cg.as_ptr(), buf, r.cg.len());
    PgStatus::PgOk
}

/// Reports the selected eigenvector index and its positivity score.
///
/// # Safety
/// `r` must be live; output pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn pg_centrality_result_selected(
    r: *const PgCentralityResult,
    index: *mut usize,
    pos_score: *mut f64,
) -> PgStatus {
    let Some(r) = r.as_ref() else {
        set_error("null result");
        return PgStatus::PgNullArgument;
    };
    if !index.is_null() {
        *index = r.selected_index;
    }
    if !pos_score.is_null() {
        *pos_score = r.pos_score;
    }
    PgStatus::PgOk
}
