//! C interface to the quantmerge scoring functions and saved models.
//!
//! Every function returns a [`QmStatus`]. On failure the message is kept
//! per thread and can be read with [`qm_last_error`]. Models are opaque
//! handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use quantmerge::gbdt::{load_gbdt, GbdtModel};
use quantmerge::qrf::{load_qrf, QrfModel};
use quantmerge::{scoring, Error, FeatureMatrix, QuantileLevel};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    FeatureMismatch = 5,
    UndefinedSkill = 6,
    Panic = 7,
}

/// A fitted boosted-tree model for one quantile level.
pub struct QmGbdt {
    inner: GbdtModel,
}

/// A fitted quantile regression forest.
pub struct QmQrf {
    inner: QrfModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QmStatus {
    match e {
        Error::Io { .. } => QmStatus::Io,
        Error::ModelFormat { .. } | Error::Csv { .. } | Error::Config(_) => QmStatus::Parse,
        Error::FeatureMismatch { .. } => QmStatus::FeatureMismatch,
        Error::UndefinedSkill => QmStatus::UndefinedSkill,
        _ => QmStatus::InvalidArgument,
    }
}

struct Fail(QmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QmStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("panic inside quantmerge");
            QmStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(QmStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(Path::new(s))
}

fn matrix(x: &[f64], n_cols: usize) -> Result<FeatureMatrix, Fail> {
    Ok(FeatureMatrix::new(x.to_vec(), n_cols)?)
}

/// Message of the last failure on this thread; empty after a success. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Pinball loss of the residual `u` at level `tau`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn qm_pinball_loss(u: f64, tau: f64, out: *mut f64) -> QmStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        *o = scoring::pinball_loss(u, QuantileLevel::new(tau)?)?;
        Ok(())
    })
}

/// Mean quantile score of `n` predictions.
///
/// # Safety
/// `predictions` and `observations` must point to `n` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn qm_mean_quantile_score(
    predictions: *const f64,
    observations: *const f64,
    n: usize,
    tau: f64,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        let p = slice(predictions, n, "predictions")?;
        let y = slice(observations, n, "observations")?;
        let o = self::out(out, "out")?;
        *o = scoring::mean_quantile_score(p, y, QuantileLevel::new(tau)?)?;
        Ok(())
    })
}

/// Absolute gap between the empirical exceedance frequency and `tau`.
///
/// # Safety
/// `predictions` and `observations` must point to `n` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn qm_frequency_score(
    predictions: *const f64,
    observations: *const f64,
    n: usize,
    tau: f64,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        let p = slice(predictions, n, "predictions")?;
        let y = slice(observations, n, "observations")?;
        let o = self::out(out, "out")?;
        *o = scoring::frequency_score(p, y, QuantileLevel::new(tau)?)?;
        Ok(())
    })
}

/// `1 - candidate / reference`; `QM_STATUS_UNDEFINED_SKILL` when the
/// reference is zero.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn qm_quantile_skill_score(
    candidate: f64,
    reference: f64,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        *o = scoring::quantile_skill_score(candidate, reference)?;
        Ok(())
    })
}

/// Loads a boosted-tree model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_gbdt_load(path: *const c_char, out: *mut *mut QmGbdt) -> QmStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let m = load_gbdt(self::path(path)?)?;
        *o = Box::into_raw(Box::new(QmGbdt { inner: m }));
        Ok(())
    })
}

/// Number of predictors the model expects.
///
/// # Safety
/// `model` must come from [`qm_gbdt_load`].
#[no_mangle]
pub unsafe extern "C" fn qm_gbdt_n_features(model: *const QmGbdt, out: *mut usize) -> QmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *self::out(out, "out")? = m.inner.feature_count;
        Ok(())
    })
}

/// Predicts `n_rows` rows of the row-major matrix `x` into `out`.
///
/// # Safety
/// `x` must hold `n_rows * n_cols` doubles and `out` room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn qm_gbdt_predict(
    model: *const QmGbdt,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let len = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| Fail(QmStatus::InvalidArgument, "size overflow".into()))?;
        let x = matrix(slice(x, len, "x")?, n_cols)?;
        let o = slice_mut(out, n_rows, "out")?;
        o.copy_from_slice(&m.inner.predict(&x)?);
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from [`qm_gbdt_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qm_gbdt_free(model: *mut QmGbdt) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Loads a forest model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_qrf_load(path: *const c_char, out: *mut *mut QmQrf) -> QmStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let m = load_qrf(self::path(path)?)?;
        *o = Box::into_raw(Box::new(QmQrf { inner: m }));
        Ok(())
    })
}

/// Number of predictors the model expects.
///
/// # Safety
/// `model` must come from [`qm_qrf_load`].
#[no_mangle]
pub unsafe extern "C" fn qm_qrf_n_features(model: *const QmQrf, out: *mut usize) -> QmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *self::out(out, "out")? = m.inner.feature_count;
        Ok(())
    })
}

/// Predicts `n_taus` quantiles for each row of `x`. `out` is row-major,
/// `n_rows * n_taus` values.
///
/// # Safety
/// `x` must hold `n_rows * n_cols` doubles, `taus` `n_taus` doubles and
/// `out` room for `n_rows * n_taus`.
#[no_mangle]
pub unsafe extern "C" fn qm_qrf_predict(
    model: *const QmQrf,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    taus: *const f64,
    n_taus: usize,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let overflow = || Fail(QmStatus::InvalidArgument, "size overflow".into());
        let len = n_rows.checked_mul(n_cols).ok_or_else(overflow)?;
        let x = matrix(slice(x, len, "x")?, n_cols)?;
        let taus = slice(taus, n_taus, "taus")?;
        let o = slice_mut(out, n_rows.checked_mul(n_taus).ok_or_else(overflow)?, "out")?;
        for (row, dst) in m
            .inner
            .predict(&x, taus)?
            .iter()
            .zip(o.chunks_mut(n_taus.max(1)))
        {
            dst.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from [`qm_qrf_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qm_qrf_free(model: *mut QmQrf) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
