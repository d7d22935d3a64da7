//! C ABI for `qcloning`.
//!
//! Every function returns a [`QclStatus`]; results come back through out
//! pointers. On failure, [`qcl_last_error`] returns a message for the calling
//! thread. Measurements are passed around as opaque [`QclPovm`] handles that
//! must be released with [`qcl_povm_free`]. Strings returned by the library
//! must be released with [`qcl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qcloning::cloner::{
    cloner_fidelity, cloner_fidelity_asymptotic, cloner_shrinking_factor, simulated_fidelity,
    ClonerSpec,
};
use qcloning::estimator::{
    average_fidelity, design_povm, estimation_fidelity_exact, estimation_shrinking_factor,
    validate_povm, AverageMode, Povm,
};
use qcloning::io::{load_povm, povm_from_json, povm_to_json, save_povm};
use qcloning::{Dimension, Error, PureState};

use num_complex::Complex64;

/// Status code returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    SizeLimit = 4,
    Infeasible = 5,
    Io = 6,
    Schema = 7,
    Panic = 8,
}

/// Opaque handle to a measurement.
pub struct QclPovm(Povm);

/// Diagnostics from [`qcl_povm_validate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QclPovmReport {
    pub outcomes: usize,
    pub min_weight: f64,
    pub completeness_residual: f64,
    pub weight_sum: f64,
    pub expected_weight_sum: f64,
    /// 1 if the measurement is positive and complete, else 0.
    pub passed: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QclStatus {
    match err {
        Error::InvalidDimension(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidCopies { .. }
        | Error::ShrinkOutOfRange(_)
        | Error::FidelityOutOfRange { .. }
        | Error::FrameTooSmall { .. }
        | Error::InvalidArgument(_) => QclStatus::InvalidArgument,
        Error::NotNormalized(_)
        | Error::ZeroVector
        | Error::NotHermitian(_)
        | Error::InvalidTrace(_)
        | Error::NotPositive(_)
        | Error::ZeroBlochProbe => QclStatus::InvalidState,
        Error::SizeGuard { .. } => QclStatus::SizeLimit,
        Error::Infeasible { .. } => QclStatus::Infeasible,
        Error::Io(_) => QclStatus::Io,
        Error::Schema(_) => QclStatus::Schema,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QclStatus>) -> QclStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QclStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            QclStatus::Panic
        }
    }
}

fn lib<T>(r: qcloning::Result<T>) -> Result<T, QclStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), QclStatus> {
    if p.is_null() {
        set_error(format!("`{name}` is null"));
        return Err(QclStatus::NullPointer);
    }
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, QclStatus> {
    non_null(p, "path")?;
    let s = CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("path is not valid UTF-8".into());
        QclStatus::InvalidArgument
    })?;
    Ok(Path::new(s))
}

fn spec(d: usize, n: usize, m: usize) -> Result<ClonerSpec, QclStatus> {
    lib(Dimension::new(d).and_then(|d| ClonerSpec::new(d, n, m)))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qcl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Single-particle fidelity of the optimal `n -> m` cloner.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qcl_cloner_fidelity(
    d: usize,
    n: usize,
    m: usize,
    out: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = cloner_fidelity(spec(d, n, m)?);
        Ok(())
    })
}

/// Shrinking factor of the optimal `n -> m` cloner.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qcl_cloner_shrinking_factor(
    d: usize,
    n: usize,
    m: usize,
    out: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = cloner_shrinking_factor(spec(d, n, m)?).get();
        Ok(())
    })
}

/// Optimal estimation fidelity from `n` copies, `(n + 1)/(n + d)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qcl_estimation_fidelity(d: usize, n: usize, out: *mut f64) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        spec(d, n, n)?;
        *out = cloner_fidelity_asymptotic(lib(Dimension::new(d))?, n);
        Ok(())
    })
}

/// Shrinking factor of optimal estimation from `n` copies, `n/(n + d)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qcl_estimation_shrinking_factor(
    d: usize,
    n: usize,
    out: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        spec(d, n, n)?;
        *out = estimation_shrinking_factor(lib(Dimension::new(d))?, n).get();
        Ok(())
    })
}

unsafe fn state_arg(d: usize, re: *const f64, im: *const f64) -> Result<PureState, QclStatus> {
    non_null(re, "re")?;
    non_null(im, "im")?;
    lib(Dimension::new(d))?;
    let re = std::slice::from_raw_parts(re, d);
    let im = std::slice::from_raw_parts(im, d);
    let amps: Vec<Complex64> = re
        .iter()
        .zip(im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    lib(PureState::from_slice(&amps))
}

/// Simulates the `n -> m` cloner on `n` copies of the normalized state with
/// amplitudes `re[k] + i im[k]`, `k < d`, and writes the single-particle
/// fidelity.
///
/// # Safety
/// `re` and `im` must point to `d` readable doubles; `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn qcl_simulate_clone_fidelity(
    d: usize,
    n: usize,
    m: usize,
    re: *const f64,
    im: *const f64,
    out: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        let s = spec(d, n, m)?;
        let psi = state_arg(d, re, im)?;
        *out = lib(simulated_fidelity(&psi, s))?;
        Ok(())
    })
}

fn emit(povm: Povm, out: *mut *mut QclPovm) -> Result<(), QclStatus> {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(QclPovm(povm))) };
    Ok(())
}

unsafe fn povm_ref<'a>(p: *const QclPovm) -> Result<&'a Povm, QclStatus> {
    non_null(p, "povm")?;
    Ok(&(*p).0)
}

/// Builds the deterministic design measurement on `n` copies.
///
/// # Safety
/// `out` must point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_design(d: usize, n: usize, out: *mut *mut QclPovm) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        let d = lib(Dimension::new(d))?;
        if n == 0 {
            set_error("copy number must be at least 1".into());
            return Err(QclStatus::InvalidArgument);
        }
        emit(lib(design_povm(d, n))?, out)
    })
}

/// Loads a measurement from a JSON file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_load(path: *const c_char, out: *mut *mut QclPovm) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        emit(lib(load_povm(path_arg(path)?))?, out)
    })
}

/// Parses a measurement from a nul-terminated JSON string.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_from_json(
    json: *const c_char,
    out: *mut *mut QclPovm,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(json, "json")?;
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("json is not valid UTF-8".into());
            QclStatus::Schema
        })?;
        emit(lib(povm_from_json(text))?, out)
    })
}

/// Writes a measurement to a JSON file.
///
/// # Safety
/// `povm` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_save(povm: *const QclPovm, path: *const c_char) -> QclStatus {
    guard(|| lib(save_povm(povm_ref(povm)?, path_arg(path)?)))
}

/// Serializes a measurement. Release the string with [`qcl_string_free`].
///
/// # Safety
/// `povm` must be a live handle; `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_to_json(
    povm: *const QclPovm,
    out: *mut *mut c_char,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = povm_to_json(povm_ref(povm)?);
        *out = CString::new(text)
            .expect("JSON has no nul bytes")
            .into_raw();
        Ok(())
    })
}

/// Dimension, copy number and outcome count of a measurement.
///
/// # Safety
/// `povm` must be a live handle; each out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_shape(
    povm: *const QclPovm,
    d: *mut usize,
    n: *mut usize,
    outcomes: *mut usize,
) -> QclStatus {
    guard(|| {
        let p = povm_ref(povm)?;
        for (ptr, v) in [(d, p.dim().get()), (n, p.copies()), (outcomes, p.len())] {
            if !ptr.is_null() {
                *ptr = v;
            }
        }
        Ok(())
    })
}

/// Checks positivity and completeness.
///
/// # Safety
/// `povm` must be a live handle; `out` writable storage for one report.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_validate(
    povm: *const QclPovm,
    out: *mut QclPovmReport,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = povm_ref(povm)?;
        let r = validate_povm(p);
        *out = QclPovmReport {
            outcomes: p.len(),
            min_weight: r.min_weight,
            completeness_residual: r.completeness_residual,
            weight_sum: r.weight_sum,
            expected_weight_sum: r.expected_weight_sum,
            passed: r.passed as i32,
        };
        Ok(())
    })
}

/// Haar-averaged estimation fidelity, computed exactly.
///
/// # Safety
/// `povm` must be a live handle; `out` writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_average_fidelity(
    povm: *const QclPovm,
    out: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = average_fidelity(povm_ref(povm)?, AverageMode::Exact).mean;
        Ok(())
    })
}

/// Monte Carlo estimate of the Haar-averaged fidelity over `samples` inputs.
///
/// # Safety
/// `povm` must be a live handle; `mean` and `std_error` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_average_fidelity_mc(
    povm: *const QclPovm,
    samples: u64,
    seed: u64,
    mean: *mut f64,
    std_error: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(mean, "mean")?;
        non_null(std_error, "std_error")?;
        if samples == 0 {
            set_error("samples must be at least 1".into());
            return Err(QclStatus::InvalidArgument);
        }
        let e = average_fidelity(povm_ref(povm)?, AverageMode::MonteCarlo { samples, seed });
        *mean = e.mean;
        *std_error = e.std_error;
        Ok(())
    })
}

/// Estimation fidelity for one input state, amplitudes `re[k] + i im[k]`.
///
/// # Safety
/// `povm` must be a live handle; `re` and `im` point to `d` readable doubles
/// where `d` is the measurement's dimension; `out` one writable double.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_fidelity(
    povm: *const QclPovm,
    re: *const f64,
    im: *const f64,
    out: *mut f64,
) -> QclStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = povm_ref(povm)?;
        let psi = state_arg(p.dim().get(), re, im)?;
        *out = estimation_fidelity_exact(p, &psi);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `povm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcl_povm_free(povm: *mut QclPovm) {
    if !povm.is_null() {
        drop(Box::from_raw(povm));
    }
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
