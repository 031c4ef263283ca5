//! C interface to `polysemy-core`.
//!
//! Every fallible function returns a [`PsxStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read with
//! [`psx_last_error_message`]. Indexes and reports are opaque handles owned by
//! the caller and released with their `_free` function. Panics never cross the
//! boundary; they surface as `PSX_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use polysemy_core::context::ContextParams;
use polysemy_core::corpus::{tokenize_documents, CorpusIndex};
use polysemy_core::pipeline::{analyze, report_json, scan, PipelineConfig, PolysemyReport};
use polysemy_core::unimodal::{circular_polysemy_index_any, isotonic, unimodal_fit};
use polysemy_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    NoSuchTerm = 3,
    Parameter = 4,
    Numerical = 5,
    Io = 6,
    Format = 7,
    Contract = 8,
    Structure = 9,
    Panic = 10,
}

/// A corpus index. Create with `psx_index_from_text` or `psx_index_load`.
pub struct PsxIndex {
    inner: CorpusIndex,
}

/// The result of analyzing one term.
pub struct PsxReport {
    inner: PolysemyReport,
}

/// Analysis parameters. `psx_config_default` fills in the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PsxConfig {
    pub k: usize,
    pub threshold: f64,
    pub mincount: usize,
    pub co_window: usize,
    pub bins: usize,
    pub smoothing_window: usize,
    pub candidate_min_freq: usize,
    pub candidate_max_freq: usize,
    pub lowercase_only: bool,
    pub seed_bin_radius: usize,
    pub prominence_floor: f64,
}

impl From<&PsxConfig> for PipelineConfig {
    fn from(c: &PsxConfig) -> Self {
        PipelineConfig {
            context: ContextParams {
                k: c.k,
                threshold: c.threshold,
                mincount: c.mincount,
                co_window: c.co_window,
            },
            bins: c.bins,
            smoothing_window: c.smoothing_window,
            candidate_min_freq: c.candidate_min_freq,
            candidate_max_freq: c.candidate_max_freq,
            lowercase_only: c.lowercase_only,
            seed_bin_radius: c.seed_bin_radius,
            prominence_floor: c.prominence_floor,
        }
    }
}

impl From<&PipelineConfig> for PsxConfig {
    fn from(c: &PipelineConfig) -> Self {
        PsxConfig {
            k: c.context.k,
            threshold: c.context.threshold,
            mincount: c.context.mincount,
            co_window: c.context.co_window,
            bins: c.bins,
            smoothing_window: c.smoothing_window,
            candidate_min_freq: c.candidate_min_freq,
            candidate_max_freq: c.candidate_max_freq,
            lowercase_only: c.lowercase_only,
            seed_bin_radius: c.seed_bin_radius,
            prominence_floor: c.prominence_floor,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsxPeak {
    pub bin: usize,
    pub value: f64,
    pub prominence: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: PsxStatus,
    message: String,
}

impl Failure {
    fn null(what: &str) -> Self {
        Failure {
            status: PsxStatus::NullPointer,
            message: format!("{what} is null"),
        }
    }
}

fn status_of(e: &Error) -> PsxStatus {
    match e {
        Error::Decode { .. } => PsxStatus::InvalidUtf8,
        Error::Structure(_) => PsxStatus::Structure,
        Error::NoSuchTerm(_) => PsxStatus::NoSuchTerm,
        Error::Parameter(_) => PsxStatus::Parameter,
        Error::Contract(_) => PsxStatus::Contract,
        Error::Numerical(_) => PsxStatus::Numerical,
        Error::Term { source, .. } => status_of(source),
        Error::Format(_) => PsxStatus::Format,
        Error::Io(_) => PsxStatus::Io,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            status: status_of(&e),
            message: e.to_string(),
        }
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure for `psx_last_error_message` and converts
/// panics into `PSX_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PsxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PsxStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            PsxStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure {
        status: PsxStatus::InvalidUtf8,
        message: format!("{what} is not UTF-8 (byte {})", e.valid_up_to()),
    })
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn doubles<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn psx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn psx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Tokenizes `len` bytes of UTF-8 text and builds an index. When `delimiter`
/// is non-NULL, lines equal to it separate documents.
///
/// # Safety
/// `text` must point to `len` readable bytes; `delimiter` must be NULL or a
/// NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psx_index_from_text(
    text: *const u8,
    len: usize,
    delimiter: *const c_char,
    out: *mut *mut PsxIndex,
) -> PsxStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        if text.is_null() && len > 0 {
            return Err(Failure::null("text"));
        }
        let bytes = if len == 0 {
            &[][..]
        } else {
            slice::from_raw_parts(text, len)
        };
        let text = std::str::from_utf8(bytes).map_err(|e| {
            Failure::from(Error::Decode {
                offset: e.valid_up_to(),
            })
        })?;
        let delimiter = if delimiter.is_null() {
            None
        } else {
            Some(c_str(delimiter, "delimiter")?)
        };
        let seg = tokenize_documents(text, delimiter);
        let inner = CorpusIndex::build_with_documents(&seg.tokens, &seg.doc_starts)?;
        *slot = Box::into_raw(Box::new(PsxIndex { inner }));
        Ok(())
    })
}

/// Reads a binary index file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_index_load(path: *const c_char, out: *mut *mut PsxIndex) -> PsxStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        let inner = CorpusIndex::load(c_str(path, "path")?)?;
        *slot = Box::into_raw(Box::new(PsxIndex { inner }));
        Ok(())
    })
}

/// Writes `index` to `path` in the binary index format.
///
/// # Safety
/// `index` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn psx_index_save(index: *const PsxIndex, path: *const c_char) -> PsxStatus {
    guard(|| {
        let index = reference(index, "index")?;
        index.inner.save(c_str(path, "path")?)?;
        Ok(())
    })
}

/// Releases an index. NULL is ignored.
///
/// # Safety
/// `index` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psx_index_free(index: *mut PsxIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// # Safety
/// `index` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_index_total_tokens(
    index: *const PsxIndex,
    out: *mut usize,
) -> PsxStatus {
    guard(|| {
        *self::out(out, "out")? = reference(index, "index")?.inner.total_tokens();
        Ok(())
    })
}

/// # Safety
/// `index` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_index_vocabulary_len(
    index: *const PsxIndex,
    out: *mut usize,
) -> PsxStatus {
    guard(|| {
        *self::out(out, "out")? = reference(index, "index")?.inner.vocabulary_len();
        Ok(())
    })
}

/// Corpus frequency of `term`; 0 when the term does not occur.
///
/// # Safety
/// `index` must be a live handle, `term` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn psx_index_freq(
    index: *const PsxIndex,
    term: *const c_char,
    out: *mut usize,
) -> PsxStatus {
    guard(|| {
        let index = reference(index, "index")?;
        let term = c_str(term, "term")?;
        *self::out(out, "out")? = index.inner.freq(term);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psx_config_default(out: *mut PsxConfig) -> PsxStatus {
    guard(|| {
        *self::out(out, "out")? = PsxConfig::from(&PipelineConfig::default());
        Ok(())
    })
}

/// Scores one term. `config` may be NULL for the defaults.
///
/// # Safety
/// `index` must be a live handle, `term` a NUL-terminated string, `config`
/// NULL or readable, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_analyze(
    index: *const PsxIndex,
    term: *const c_char,
    config: *const PsxConfig,
    out: *mut *mut PsxReport,
) -> PsxStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        let index = reference(index, "index")?;
        let term = c_str(term, "term")?;
        let config = config
            .as_ref()
            .map_or_else(PipelineConfig::default, PipelineConfig::from);
        let inner = analyze(&index.inner, term, &config)?;
        *slot = Box::into_raw(Box::new(PsxReport { inner }));
        Ok(())
    })
}

/// Scores every candidate on `workers` threads and returns the ranked reports
/// as a JSON array. Free the string with `psx_string_free`.
///
/// # Safety
/// `index` must be a live handle, `config` NULL or readable, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn psx_scan_json(
    index: *const PsxIndex,
    config: *const PsxConfig,
    workers: usize,
    out: *mut *mut c_char,
) -> PsxStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        let index = reference(index, "index")?;
        let config = config
            .as_ref()
            .map_or_else(PipelineConfig::default, PipelineConfig::from);
        let reports = scan(&index.inner, &config, workers)?;
        *slot = into_c_string(report_json(&reports));
        Ok(())
    })
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psx_report_free(report: *mut PsxReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_report_index(report: *const PsxReport, out: *mut f64) -> PsxStatus {
    guard(|| {
        *self::out(out, "out")? = reference(report, "report")?.inner.index;
        Ok(())
    })
}

/// Number of relevant context terms that were embedded.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_report_n_w(report: *const PsxReport, out: *mut usize) -> PsxStatus {
    guard(|| {
        *self::out(out, "out")? = reference(report, "report")?.inner.n_w;
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_report_peak_count(
    report: *const PsxReport,
    out: *mut usize,
) -> PsxStatus {
    guard(|| {
        *self::out(out, "out")? = reference(report, "report")?.inner.peaks.len();
        Ok(())
    })
}

/// Peak `i`, strongest first.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_report_peak(
    report: *const PsxReport,
    i: usize,
    out: *mut PsxPeak,
) -> PsxStatus {
    guard(|| {
        let report = reference(report, "report")?;
        let slot = self::out(out, "out")?;
        let peak = report.inner.peaks.get(i).ok_or_else(|| Failure {
            status: PsxStatus::Parameter,
            message: format!("peak {i} out of range ({} peaks)", report.inner.peaks.len()),
        })?;
        *slot = PsxPeak {
            bin: peak.bin,
            value: peak.value,
            prominence: peak.prominence,
        };
        Ok(())
    })
}

/// Borrows the smoothed radial profile. The array lives as long as the report.
///
/// # Safety
/// `report` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psx_report_profile(
    report: *const PsxReport,
    data: *mut *const f64,
    len: *mut usize,
) -> PsxStatus {
    guard(|| {
        let report = reference(report, "report")?;
        let data = self::out(data, "data")?;
        let len = self::out(len, "len")?;
        *data = report.inner.smoothed_profile.as_ptr();
        *len = report.inner.smoothed_profile.len();
        Ok(())
    })
}

/// The full report, seeds included, as a JSON object. Free the string with
/// `psx_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psx_report_json(
    report: *const PsxReport,
    out: *mut *mut c_char,
) -> PsxStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        let report = reference(report, "report")?;
        let json = serde_json::to_string(&report.inner).map_err(|e| Failure {
            status: PsxStatus::Numerical,
            message: e.to_string(),
        })?;
        *slot = into_c_string(json);
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Least-squares non-decreasing fit of `x`, written to `fitted` (length `n`).
/// `sse` may be NULL.
///
/// # Safety
/// `x` and `fitted` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn psx_isotonic(
    x: *const f64,
    n: usize,
    fitted: *mut f64,
    sse: *mut f64,
) -> PsxStatus {
    guard(|| {
        let x = doubles(x, n, "x")?;
        if fitted.is_null() && n > 0 {
            return Err(Failure::null("fitted"));
        }
        let fit = isotonic(x)?;
        if n > 0 {
            slice::from_raw_parts_mut(fitted, n).copy_from_slice(&fit.fitted);
        }
        if let Some(sse) = sse.as_mut() {
            *sse = fit.sse;
        }
        Ok(())
    })
}

/// Best single-peaked fit of `x`: 1-based peak position and residual.
///
/// # Safety
/// `x` must hold `n` doubles; `peak` and `sse` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psx_unimodal_fit(
    x: *const f64,
    n: usize,
    peak: *mut usize,
    sse: *mut f64,
) -> PsxStatus {
    guard(|| {
        let x = doubles(x, n, "x")?;
        let peak = self::out(peak, "peak")?;
        let sse = self::out(sse, "sse")?;
        let fit = unimodal_fit(x)?;
        *peak = fit.peak;
        *sse = fit.combined_sse;
        Ok(())
    })
}

/// Polysemy index of a circular profile of `n` non-negative bins.
/// `peak_bin` may be NULL.
///
/// # Safety
/// `profile` must hold `n` doubles; `index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psx_circular_index(
    profile: *const f64,
    n: usize,
    index: *mut f64,
    peak_bin: *mut usize,
) -> PsxStatus {
    guard(|| {
        let profile = doubles(profile, n, "profile")?;
        let index = self::out(index, "index")?;
        let fit = circular_polysemy_index_any(profile)?;
        *index = fit.index;
        if let Some(p) = peak_bin.as_mut() {
            *p = fit.peak_bin;
        }
        Ok(())
    })
}
