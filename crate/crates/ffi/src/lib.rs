//! C ABI over the `w1kp` library.
//!
//! Conventions shared by every function:
//!
//! - The return value is a [`W1kpStatus`]; results go through out-pointers,
//!   which are written only on success.
//! - Objects are opaque heap handles created by `*_read`, `*_fit`, ... and
//!   released with the matching `*_free`, which accepts NULL.
//! - After a non-OK status, [`w1kp_last_error`] returns a message for the
//!   calling thread.
//! - Panics never cross the boundary; they surface as `W1KP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use w1kp::distance::pairwise_matrix;
use w1kp::normalization::{fit_cdf, load_cdf, normalize_matrix, save_cdf};
use w1kp::variability::{eta_k, eta_mean, Estimator, EstimatorPolicy, Kernel, VariabilityScore};
use w1kp::{
    io, CalibrationCutoffs, DistanceMatrix, EmbeddingSet, Error, FittedCdf, MetricKind,
    SimilarityLevel,
};

pub const W1KP_METRIC_EUCLIDEAN: u32 = 0;
pub const W1KP_METRIC_SQUARED_EUCLIDEAN: u32 = 1;
pub const W1KP_METRIC_COSINE: u32 = 2;

pub const W1KP_LEVEL_NONE: u32 = 0;
pub const W1KP_LEVEL_LOW: u32 = 1;
pub const W1KP_LEVEL_MID: u32 = 2;
pub const W1KP_LEVEL_HIGH: u32 = 3;

/// Result code of every call. Values 1 to 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum W1kpStatus {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Capacity = 3,
    Format = 4,
    Calibration = 5,
    NullPointer = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

/// Embedding set handle.
pub struct W1kpEmbeddings {
    inner: EmbeddingSet,
}

/// Fitted CDF handle.
pub struct W1kpCdf {
    inner: FittedCdf,
}

/// Symmetric distance matrix handle, raw or normalized.
pub struct W1kpMatrix {
    inner: DistanceMatrix,
}

/// A variability score. `k` is 0 for the pairwise-mean kernel; `samples`
/// and `seed` are 0 unless `monte_carlo` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W1kpScore {
    pub eta: f64,
    pub w1kp: f64,
    pub k: usize,
    pub monte_carlo: bool,
    pub samples: u64,
    pub seed: u64,
}

impl From<VariabilityScore> for W1kpScore {
    fn from(s: VariabilityScore) -> Self {
        let k = match s.kernel {
            Kernel::Mean => 0,
            Kernel::KMax { k } => k,
        };
        let (monte_carlo, samples, seed) = match s.estimator {
            Estimator::Exact => (false, 0, 0),
            Estimator::MonteCarlo { samples, seed } => (true, samples, seed),
        };
        W1kpScore {
            eta: s.eta,
            w1kp: s.w1kp,
            k,
            monte_carlo,
            samples,
            seed,
        }
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs were replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> FfiResult) -> W1kpStatus {
    let (status, message) = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => return W1kpStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = match &e {
                Error::Io { .. } => W1kpStatus::Io,
                Error::Format { .. } | Error::Record { .. } => W1kpStatus::Format,
                Error::Validation(_) | Error::UndefinedCorrelation(_) => W1kpStatus::Validation,
                Error::Capacity(_) => W1kpStatus::Capacity,
                Error::Calibration(_) => W1kpStatus::Calibration,
            };
            (status, e.to_string())
        }
        Ok(Err(Failure::Null(what))) => (W1kpStatus::NullPointer, format!("{what} is NULL")),
        Ok(Err(Failure::Utf8(what))) => (
            W1kpStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        ),
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (W1kpStatus::Panic, format!("internal panic: {detail}"))
        }
    };
    set_last_error(message);
    status
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> FfiResult {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn string<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn metric(code: u32) -> FfiResult<MetricKind> {
    match code {
        W1KP_METRIC_EUCLIDEAN => Ok(MetricKind::Euclidean),
        W1KP_METRIC_SQUARED_EUCLIDEAN => Ok(MetricKind::SquaredEuclidean),
        W1KP_METRIC_COSINE => Ok(MetricKind::Cosine),
        other => Err(Error::validation(format!("unknown metric code {other}")).into()),
    }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message describing the last failure on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn w1kp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Reads a W1KPEMB1 or CSV embedding file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_embeddings_read(
    path: *const c_char,
    out: *mut *mut W1kpEmbeddings,
) -> W1kpStatus {
    guard(|| {
        let set = io::read_embeddings(string(path, "path")?)?;
        write(out, boxed(W1kpEmbeddings { inner: set }), "out")
    })
}

/// Builds a set from `n` ids and an `n * dim` row-major value array.
///
/// # Safety
/// `ids` must hold `n` NUL-terminated strings and `values` `n * dim` floats.
#[no_mangle]
pub unsafe extern "C" fn w1kp_embeddings_from_rows(
    ids: *const *const c_char,
    values: *const f32,
    n: usize,
    dim: usize,
    out: *mut *mut W1kpEmbeddings,
) -> W1kpStatus {
    guard(|| {
        let count = n
            .checked_mul(dim)
            .ok_or_else(|| Error::validation("n * dim overflows"))?;
        let id_ptrs = slice(ids, n, "ids")?;
        let ids = id_ptrs
            .iter()
            .map(|&p| string(p, "id").map(str::to_owned))
            .collect::<FfiResult<Vec<_>>>()?;
        let data = slice(values, count, "values")?.to_vec();
        let set = EmbeddingSet::from_flat(ids, dim, data, "")?;
        write(out, boxed(W1kpEmbeddings { inner: set }), "out")
    })
}

/// Number of images, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn w1kp_embeddings_len(set: *const W1kpEmbeddings) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Embedding dimension, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn w1kp_embeddings_dim(set: *const W1kpEmbeddings) -> usize {
    set.as_ref().map_or(0, |s| s.inner.dim())
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn w1kp_embeddings_free(set: *mut W1kpEmbeddings) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Raw distance between two `dim`-length vectors.
///
/// # Safety
/// `a` and `b` must hold `dim` floats; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_distance(
    metric_code: u32,
    a: *const f32,
    b: *const f32,
    dim: usize,
    out: *mut f64,
) -> W1kpStatus {
    guard(|| {
        let d = metric(metric_code)?.distance(slice(a, dim, "a")?, slice(b, dim, "b")?)?;
        write(out, d, "out")
    })
}

/// Raw pairwise distance matrix of a set.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_pairwise(
    set: *const W1kpEmbeddings,
    metric_code: u32,
    out: *mut *mut W1kpMatrix,
) -> W1kpStatus {
    guard(|| {
        let m = pairwise_matrix(&borrow(set, "set")?.inner, metric(metric_code)?)?;
        write(out, boxed(W1kpMatrix { inner: m }), "out")
    })
}

/// Side length of the matrix, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn w1kp_matrix_size(m: *const W1kpMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.size())
}

/// Entry `(i, j)`; the diagonal is 0.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_matrix_get(
    m: *const W1kpMatrix,
    i: usize,
    j: usize,
    out: *mut f64,
) -> W1kpStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.inner;
        if i >= m.size() || j >= m.size() {
            return Err(Error::validation(format!(
                "index ({i}, {j}) out of range for size {}",
                m.size()
            ))
            .into());
        }
        write(out, m.get(i, j), "out")
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn w1kp_matrix_free(m: *mut W1kpMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Fits an empirical CDF to `len` raw distances. `provenance` may be NULL.
///
/// # Safety
/// `distances` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_fit(
    distances: *const f64,
    len: usize,
    metric_code: u32,
    provenance: *const c_char,
    out: *mut *mut W1kpCdf,
) -> W1kpStatus {
    guard(|| {
        let provenance = if provenance.is_null() {
            ""
        } else {
            string(provenance, "provenance")?
        };
        let cdf = fit_cdf(
            slice(distances, len, "distances")?.to_vec(),
            metric(metric_code)?,
            provenance,
        )?;
        write(out, boxed(W1kpCdf { inner: cdf }), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_load(path: *const c_char, out: *mut *mut W1kpCdf) -> W1kpStatus {
    guard(|| {
        let cdf = load_cdf(string(path, "path")?)?;
        write(out, boxed(W1kpCdf { inner: cdf }), "out")
    })
}

/// # Safety
/// `cdf` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_save(cdf: *const W1kpCdf, path: *const c_char) -> W1kpStatus {
    guard(|| Ok(save_cdf(&borrow(cdf, "cdf")?.inner, string(path, "path")?)?))
}

/// Fraction of the reference sample `<= x`.
///
/// # Safety
/// `cdf` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_apply(cdf: *const W1kpCdf, x: f64, out: *mut f64) -> W1kpStatus {
    guard(|| write(out, borrow(cdf, "cdf")?.inner.apply(x), "out"))
}

/// Reference sample size, or 0 for NULL.
///
/// # Safety
/// `cdf` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_len(cdf: *const W1kpCdf) -> usize {
    cdf.as_ref().map_or(0, |c| c.inner.len())
}

/// Metric code the CDF was fitted for, or `UINT32_MAX` for NULL.
///
/// # Safety
/// `cdf` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_metric(cdf: *const W1kpCdf) -> u32 {
    cdf.as_ref().map_or(u32::MAX, |c| match c.inner.metric() {
        MetricKind::Euclidean => W1KP_METRIC_EUCLIDEAN,
        MetricKind::SquaredEuclidean => W1KP_METRIC_SQUARED_EUCLIDEAN,
        MetricKind::Cosine => W1KP_METRIC_COSINE,
    })
}

/// # Safety
/// `cdf` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn w1kp_cdf_free(cdf: *mut W1kpCdf) {
    if !cdf.is_null() {
        drop(Box::from_raw(cdf));
    }
}

/// Maps a raw matrix through the CDF into a new normalized matrix.
///
/// # Safety
/// `raw` and `cdf` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_normalize(
    raw: *const W1kpMatrix,
    cdf: *const W1kpCdf,
    out: *mut *mut W1kpMatrix,
) -> W1kpStatus {
    guard(|| {
        let m = normalize_matrix(&borrow(raw, "raw")?.inner, &borrow(cdf, "cdf")?.inner)?;
        write(out, boxed(W1kpMatrix { inner: m }), "out")
    })
}

/// Pairwise-mean score of a normalized matrix.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_eta_mean(m: *const W1kpMatrix, out: *mut W1kpScore) -> W1kpStatus {
    guard(|| write(out, eta_mean(&borrow(m, "matrix")?.inner)?.into(), "out"))
}

/// k-expected-maximum score of a normalized matrix. Subsets are enumerated
/// when there are at most `exact_budget` of them and sampled
/// `mc_samples` times otherwise, which requires `has_seed`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_eta_k(
    m: *const W1kpMatrix,
    k: usize,
    exact_budget: u64,
    mc_samples: u64,
    has_seed: bool,
    seed: u64,
    out: *mut W1kpScore,
) -> W1kpStatus {
    guard(|| {
        let policy = EstimatorPolicy {
            exact_budget,
            mc_samples,
            seed: has_seed.then_some(seed),
        };
        write(
            out,
            eta_k(&borrow(m, "matrix")?.inner, k, &policy)?.into(),
            "out",
        )
    })
}

/// Similarity level (`W1KP_LEVEL_*`) of `score` under the given cutoffs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w1kp_classify(
    score: f64,
    beta_low: f64,
    beta_mid: f64,
    beta_high: f64,
    out: *mut u32,
) -> W1kpStatus {
    guard(|| {
        let cutoffs = CalibrationCutoffs::new(beta_low, beta_mid, beta_high)?;
        let level = match cutoffs.classify(score) {
            SimilarityLevel::None => W1KP_LEVEL_NONE,
            SimilarityLevel::Low => W1KP_LEVEL_LOW,
            SimilarityLevel::Mid => W1KP_LEVEL_MID,
            SimilarityLevel::High => W1KP_LEVEL_HIGH,
        };
        write(out, level, "out")
    })
}
