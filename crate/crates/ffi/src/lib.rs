//! C ABI over `tracealign`.
//!
//! Every fallible call returns a [`TaStatus`]; on failure the message is
//! available from [`ta_last_error_message`] on the same thread until the
//! next failing call. Strings returned through out-parameters are owned by
//! the caller and must be released with [`ta_string_free`]; corpora with
//! [`ta_corpus_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tracealign::report::{build_report, ReportConfig};
use tracealign::trace::{parse_corpus, Cohort, Corpus};
use tracealign::{stats, ErrorCode};

/// Status codes; values are stable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaStatus {
    Ok = 0,
    MalformedLine = 1,
    MissingField = 2,
    InvalidField = 3,
    UnknownTask = 4,
    NonMonotoneTimestamps = 5,
    TimeBounds = 6,
    DuplicateRunId = 7,
    InvalidTask = 8,
    InvalidStateMap = 9,
    EmptySample = 10,
    DegenerateTable = 11,
    EmptyCohort = 12,
    SizeExceedsPool = 13,
    InvalidProfile = 14,
    InvalidArgument = 15,
    IoError = 16,
    NullPointer = 100,
    InvalidUtf8 = 101,
    Panic = 102,
}

impl From<ErrorCode> for TaStatus {
    fn from(code: ErrorCode) -> Self {
        match code {
            ErrorCode::MalformedLine => TaStatus::MalformedLine,
            ErrorCode::MissingField => TaStatus::MissingField,
            ErrorCode::InvalidField => TaStatus::InvalidField,
            ErrorCode::UnknownTask => TaStatus::UnknownTask,
            ErrorCode::NonMonotoneTimestamps => TaStatus::NonMonotoneTimestamps,
            ErrorCode::TimeBounds => TaStatus::TimeBounds,
            ErrorCode::DuplicateRunId => TaStatus::DuplicateRunId,
            ErrorCode::InvalidTask => TaStatus::InvalidTask,
            ErrorCode::InvalidStateMap => TaStatus::InvalidStateMap,
            ErrorCode::EmptySample => TaStatus::EmptySample,
            ErrorCode::DegenerateTable => TaStatus::DegenerateTable,
            ErrorCode::EmptyCohort => TaStatus::EmptyCohort,
            ErrorCode::SizeExceedsPool => TaStatus::SizeExceedsPool,
            ErrorCode::InvalidProfile => TaStatus::InvalidProfile,
            ErrorCode::InvalidArgument => TaStatus::InvalidArgument,
            ErrorCode::Io => TaStatus::IoError,
        }
    }
}

/// Opaque parsed corpus.
pub struct TaCorpus {
    inner: Corpus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: TaStatus, message: impl Into<String>) -> TaStatus {
    set_error(message);
    status
}

fn from_error(e: tracealign::Error) -> TaStatus {
    let status = TaStatus::from(e.code());
    fail(status, format!("{}: {e}", e.code().as_str()))
}

fn guard(f: impl FnOnce() -> TaStatus) -> TaStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(TaStatus::Panic, "internal panic"))
}

/// Borrow `len` bytes at `data`; a null pointer is accepted only with len 0.
unsafe fn bytes<'a>(data: *const u8, len: usize) -> Option<&'a [u8]> {
    if data.is_null() {
        return (len == 0).then_some(&[]);
    }
    Some(std::slice::from_raw_parts(data, len))
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, TaStatus> {
    if s.is_null() {
        return Err(fail(TaStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(TaStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn give_string(s: String, out: *mut *mut c_char) -> TaStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            TaStatus::Ok
        }
        Err(_) => fail(TaStatus::InvalidArgument, "output contains an interior NUL byte"),
    }
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ta_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a corpus from in-memory JSON Lines traces, a JSON task array
/// and an optional state map (`states` may be NULL).
///
/// # Safety
/// Each non-null pointer must reference at least the given number of
/// readable bytes; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ta_corpus_parse(
    traces: *const u8,
    traces_len: usize,
    tasks: *const u8,
    tasks_len: usize,
    states: *const u8,
    states_len: usize,
    out: *mut *mut TaCorpus,
) -> TaStatus {
    guard(|| {
        if out.is_null() {
            return fail(TaStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let (Some(t), Some(k)) = (bytes(traces, traces_len), bytes(tasks, tasks_len)) else {
            return fail(TaStatus::NullPointer, "null input buffer with non-zero length");
        };
        let s = if states.is_null() { None } else { bytes(states, states_len) };
        match parse_corpus(t, k, s) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TaCorpus { inner }));
                TaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `corpus` must be NULL or a pointer obtained from [`ta_corpus_parse`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ta_corpus_free(corpus: *mut TaCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of runs in the corpus, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live corpus handle.
#[no_mangle]
pub unsafe extern "C" fn ta_corpus_run_count(corpus: *const TaCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.runs().len())
}

/// Number of runs of one cohort (0 = agent, 1 = participant).
///
/// # Safety
/// `corpus` must be NULL or a live corpus handle.
#[no_mangle]
pub unsafe extern "C" fn ta_corpus_cohort_count(corpus: *const TaCorpus, cohort: u32) -> usize {
    let cohort = match cohort {
        0 => Cohort::Agent,
        1 => Cohort::Participant,
        _ => return 0,
    };
    corpus.as_ref().map_or(0, |c| c.inner.runs_of(cohort).count())
}

/// Full JSON report. `config_json` may be NULL for defaults or a JSON
/// object overriding any subset of the configuration fields.
///
/// # Safety
/// `corpus` must be a live handle, `config_json` NULL or NUL-terminated,
/// and `out` a valid pointer. Free the result with [`ta_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ta_report_json(
    corpus: *const TaCorpus,
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> TaStatus {
    guard(|| {
        let (Some(corpus), false) = (corpus.as_ref(), out.is_null()) else {
            return fail(TaStatus::NullPointer, "null corpus or output pointer");
        };
        *out = ptr::null_mut();
        let config = if config_json.is_null() {
            ReportConfig::default()
        } else {
            let text = match c_str(config_json) {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str(text) {
                Ok(c) => c,
                Err(e) => return fail(TaStatus::InvalidArgument, format!("config: {e}")),
            }
        };
        match build_report(&corpus.inner, &config) {
            Ok(r) => give_string(r.to_json(), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ta_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Wilson score interval for `successes` of `n`.
///
/// # Safety
/// `lo` and `hi` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ta_wilson_ci(successes: u64, n: u64, confidence: f64, lo: *mut f64, hi: *mut f64) -> TaStatus {
    guard(|| {
        if lo.is_null() || hi.is_null() {
            return fail(TaStatus::NullPointer, "null output pointer");
        }
        match stats::wilson_ci(successes, n, confidence) {
            Ok(ci) => {
                *lo = ci.lo;
                *hi = ci.hi;
                TaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Two-sided Mann–Whitney U. `u` receives min(U_x, U_y).
///
/// # Safety
/// `x` and `y` must reference `nx` and `ny` doubles; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn ta_mann_whitney_u(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    u: *mut f64,
    p: *mut f64,
) -> TaStatus {
    guard(|| {
        if u.is_null() || p.is_null() || (x.is_null() && nx > 0) || (y.is_null() && ny > 0) {
            return fail(TaStatus::NullPointer, "null pointer argument");
        }
        let xs = if nx == 0 { &[][..] } else { std::slice::from_raw_parts(x, nx) };
        let ys = if ny == 0 { &[][..] } else { std::slice::from_raw_parts(y, ny) };
        match stats::mann_whitney_u(xs, ys) {
            Ok(t) => {
                *u = t.statistic;
                *p = t.p_value;
                TaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Pearson χ² on the 2×2 table [[a, b], [c, d]] without continuity
/// correction.
///
/// # Safety
/// `statistic` and `p` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ta_pearson_chi2_2x2(
    a: u64,
    b: u64,
    c: u64,
    d: u64,
    statistic: *mut f64,
    p: *mut f64,
) -> TaStatus {
    guard(|| {
        if statistic.is_null() || p.is_null() {
            return fail(TaStatus::NullPointer, "null output pointer");
        }
        match stats::pearson_chi2(&[vec![a, b], vec![c, d]]) {
            Ok(t) => {
                *statistic = t.statistic;
                *p = t.p_value;
                TaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Gestalt ratio of two NUL-terminated UTF-8 strings, compared as given.
///
/// # Safety
/// `a` and `b` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ta_gestalt_ratio(a: *const c_char, b: *const c_char, out: *mut f64) -> TaStatus {
    guard(|| {
        if out.is_null() {
            return fail(TaStatus::NullPointer, "null output pointer");
        }
        let (a, b) = match (c_str(a), c_str(b)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        *out = tracealign::query::gestalt_ratio(a, b);
        TaStatus::Ok
    })
}
