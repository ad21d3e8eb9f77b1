//! C ABI over `sigma_minmax`.
//!
//! Configurations live behind an opaque [`SmConfig`] handle created from
//! JSON and released with [`sm_config_free`]. Every fallible function
//! returns an [`SmStatus`] and writes its result through an out-pointer;
//! on failure a message is available from [`sm_last_error`] until the next
//! call on the same thread. Strings handed out by the library must be
//! released with [`sm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sigma_minmax::certificates;
use sigma_minmax::closed_form;
use sigma_minmax::geometry::{parse_configuration, Configuration};
use sigma_minmax::objective::{self, ObjectiveValue};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Domain = 4,
    Computation = 5,
    UnknownName = 6,
    /// No feasible candidate; the out-value is left untouched.
    NoValue = 7,
    Panic = 8,
}

/// Opaque configuration handle.
pub struct SmConfig {
    inner: Configuration,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, converting panics into [`SmStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (SmStatus, String)>) -> SmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SmStatus::Panic
        }
    }
}

fn null(what: &str) -> (SmStatus, String) {
    (SmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (SmStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn config<'a>(cfg: *const SmConfig) -> Result<&'a Configuration, (SmStatus, String)> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (SmStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn sm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a configuration document (the CLI's JSON format).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_config_from_json(json: *const c_char, out: *mut *mut SmConfig) -> SmStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = parse_configuration(text).map_err(|e| (SmStatus::InvalidConfig, e.to_string()))?;
        out.write(Box::into_raw(Box::new(SmConfig { inner })));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `cfg` must come from [`sm_config_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sm_config_free(cfg: *mut SmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of points, including the origin.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_config_len(cfg: *const SmConfig, out: *mut usize) -> SmStatus {
    guard(|| write(out, config(cfg)?.len(), "out"))
}

fn eval_status(res: Result<Option<ObjectiveValue>, objective::ObjectiveError>) -> Result<f64, (SmStatus, String)> {
    match res {
        Ok(Some(v)) => Ok(v.value),
        Ok(None) => Err((SmStatus::NoValue, "no feasible candidate".into())),
        Err(e) => Err((SmStatus::Computation, e.to_string())),
    }
}

/// Certified lower bound on `M_σ` (sharp and flat branches, singletons
/// included).
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_m_sigma(cfg: *const SmConfig, out: *mut f64) -> SmStatus {
    guard(|| {
        let v = eval_status(objective::m_sigma(config(cfg)?).map(Some))?;
        write(out, v, "out")
    })
}

/// Certified lower bound on `M♯` over subsets containing the last `tail`
/// points (0 for all subsets).
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_m_sharp(cfg: *const SmConfig, tail: usize, out: *mut f64) -> SmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        if tail > cfg.len() {
            return Err((SmStatus::Domain, format!("tail {tail} exceeds {} points", cfg.len())));
        }
        let v = eval_status(objective::m_sharp(cfg, tail))?;
        write(out, v, "out")
    })
}

/// Certified lower bound on `M♭` (never below 0).
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_m_flat(cfg: *const SmConfig, out: *mut f64) -> SmStatus {
    guard(|| {
        let v = eval_status(objective::m_flat(config(cfg)?).map(Some))?;
        write(out, v, "out")
    })
}

/// Flat maximum restricted to subsets of at least two points.
/// [`SmStatus::NoValue`] when fewer than two distinct points exist.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_bar_m_flat(cfg: *const SmConfig, out: *mut f64) -> SmStatus {
    guard(|| {
        let v = eval_status(objective::bar_m_flat(config(cfg)?))?;
        write(out, v, "out")
    })
}

/// Runs a certificate by name (`all` for the built-in three) and returns
/// the JSON report list through `out_json`; `out_pass` receives 1 when
/// every check passed, else 0. Release the string with [`sm_string_free`].
///
/// # Safety
/// `name` must be NUL-terminated; `out_json` and `out_pass` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_certify_json(name: *const c_char, out_json: *mut *mut c_char, out_pass: *mut i32) -> SmStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        if out_json.is_null() || out_pass.is_null() {
            return Err(null("out"));
        }
        let reports = if name == "all" {
            certificates::certify_all()
        } else {
            certificates::certify(name).map(|r| vec![r])
        }
        .map_err(|e| match e {
            certificates::CertificateError::UnknownName(_) => (SmStatus::UnknownName, e.to_string()),
            other => (SmStatus::Computation, other.to_string()),
        })?;
        let pass = reports.iter().all(|r| r.overall);
        let text = serde_json::to_string(&reports).expect("report serializes");
        let c = CString::new(text).map_err(|e| (SmStatus::Computation, e.to_string()))?;
        out_json.write(c.into_raw());
        out_pass.write(i32::from(pass));
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn domain<T>(r: Result<T, closed_form::DomainError>) -> Result<T, (SmStatus, String)> {
    r.map_err(|e| (SmStatus::Domain, e.to_string()))
}

/// `0⓵MinMax_σ = max{0, 1 − 3/(4σ)}` for σ in (1/2, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_zero_gen_minmax(sigma: f64, out: *mut f64) -> SmStatus {
    guard(|| write(out, domain(closed_form::zero_gen_minmax(sigma))?, "out"))
}

/// `1⓵MinMax_σ` for σ in (1/2, 3/4].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_one_gen_minmax(sigma: f64, out: *mut f64) -> SmStatus {
    guard(|| write(out, domain(closed_form::one_gen_minmax(sigma))?, "out"))
}

/// Closed-form `M♯({O, p₁, p₂})` from the side lengths `D = |p₁ − p₂|`,
/// `d1 = |p₁|`, `d2 = |p₂|`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_max_diesis(sigma: f64, d: f64, d1: f64, d2: f64, out: *mut f64) -> SmStatus {
    guard(|| {
        let t = closed_form::TriangleParams::new(d, d1, d2);
        write(out, domain(closed_form::max_diesis(sigma, t))?, "out")
    })
}

/// Root of `8s³ + 4s² − 3s − 3`, about 0.72655.
#[no_mangle]
pub extern "C" fn sm_sigma_pt() -> f64 {
    closed_form::sigma_pt()
}

/// Root of `32s³ − 32s² + 12s − 3`, about 0.64368.
#[no_mangle]
pub extern "C" fn sm_sigma_lower() -> f64 {
    closed_form::sigma_lower()
}
