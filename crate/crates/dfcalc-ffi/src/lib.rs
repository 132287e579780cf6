//! C ABI over the dfcalc engine.
//!
//! Grid functions travel as opaque handles over doubles; every entry point
//! returns a [`DfcStatus`] and leaves a human-readable message for
//! [`dfc_last_error`] on failure. Identity and summation-by-parts checks
//! run on the exact rational backend internally; the doubles a caller
//! hands over are binary rationals, so "deviation exactly zero" survives
//! the language boundary (`exact_pass` reports it; the returned deviation
//! is the nearest double).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use num::rational::BigRational;
use num::traits::Zero;

use dfcalc::byparts::{sbp, SbpTheorem};
use dfcalc::error::Error;
use dfcalc::grid::{Grid, GridFunction};
use dfcalc::identities::{check_identity, IdentityId};
use dfcalc::kernels::FracOrder;
use dfcalc::operators::{parse_operator_name, OperatorSpec};
use dfcalc::scalar::Scalar;

/// Status code of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DomainError = 3,
    UndefinedForm = 4,
    SingularSystem = 5,
    NoConvergence = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn fail(status: DfcStatus, message: String) -> DfcStatus {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
    status
}

fn fail_error(e: Error) -> DfcStatus {
    let status = match &e {
        Error::UndefinedForm(_) => DfcStatus::UndefinedForm,
        Error::Parse(_) => DfcStatus::InvalidArgument,
        Error::Domain(_) | Error::EmptyCommonDomain(_) => DfcStatus::DomainError,
        Error::Singular(_) => DfcStatus::SingularSystem,
        Error::NonConvergence { .. } => DfcStatus::NoConvergence,
    };
    fail(status, e.to_string())
}

/// Copy the message of the most recent failure on this thread into `buf`
/// (NUL-terminated, truncated to `cap`). Returns the full message length.
///
/// # Safety
/// `buf` must be valid for `cap` writable bytes (or `cap` may be 0).
#[no_mangle]
pub unsafe extern "C" fn dfc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // always terminate
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dfc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Opaque grid function over doubles: `len` values at `base, base+1, ...`.
pub struct DfcGridFn {
    inner: GridFunction<f64>,
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, DfcStatus> {
    if ptr.is_null() {
        return Err(fail(DfcStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(DfcStatus::InvalidArgument, "string is not UTF-8".into()))
}

fn exact_base(base: f64) -> Result<BigRational, DfcStatus> {
    BigRational::from_float(base)
        .ok_or_else(|| fail(DfcStatus::InvalidArgument, format!("base {base} is not finite")))
}

/// Create a grid function from `len` values starting at `base`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_gridfn_new(
    base: f64,
    values: *const f64,
    len: usize,
    out: *mut *mut DfcGridFn,
) -> DfcStatus {
    if values.is_null() || out.is_null() {
        return fail(DfcStatus::NullArgument, "null pointer".into());
    }
    if len == 0 {
        return fail(DfcStatus::InvalidArgument, "a grid needs at least one point".into());
    }
    let base = match exact_base(base) {
        Ok(b) => b,
        Err(s) => return s,
    };
    let data = std::slice::from_raw_parts(values, len).to_vec();
    match GridFunction::new(Grid::new(base, len), data) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(DfcGridFn { inner }));
            DfcStatus::Ok
        }
        Err(e) => fail_error(e),
    }
}

/// Release a handle created by this library. Null is ignored.
///
/// # Safety
/// `f` must be a pointer previously returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn dfc_gridfn_free(f: *mut DfcGridFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `f` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn dfc_gridfn_len(f: *const DfcGridFn) -> usize {
    if f.is_null() {
        0
    } else {
        (*f).inner.grid().count()
    }
}

/// Smallest grid point (NaN for a null handle).
///
/// # Safety
/// `f` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn dfc_gridfn_base(f: *const DfcGridFn) -> f64 {
    if f.is_null() {
        f64::NAN
    } else {
        dfcalc::scalar::big_rational_to_f64((*f).inner.grid().base())
    }
}

/// Copy the values into `out` (which must hold at least `len` doubles).
///
/// # Safety
/// `f` must be a valid handle; `out` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dfc_gridfn_values(
    f: *const DfcGridFn,
    out: *mut f64,
    cap: usize,
) -> DfcStatus {
    if f.is_null() || out.is_null() {
        return fail(DfcStatus::NullArgument, "null pointer".into());
    }
    let values = (*f).inner.values();
    if cap < values.len() {
        return fail(
            DfcStatus::InvalidArgument,
            format!("buffer holds {cap} values, need {}", values.len()),
        );
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    DfcStatus::Ok
}

/// Apply a fractional operator (`{delta|nabla}-{left|right}-{sum|rl|caputo}`)
/// of order `alpha` anchored at `anchor` to `f`, producing a new handle.
///
/// # Safety
/// `op` must be NUL-terminated; `f` a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dfc_apply(
    op: *const c_char,
    alpha: f64,
    anchor: f64,
    f: *const DfcGridFn,
    out: *mut *mut DfcGridFn,
) -> DfcStatus {
    if f.is_null() || out.is_null() {
        return fail(DfcStatus::NullArgument, "null pointer".into());
    }
    let name = match str_arg(op) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let (direction, side, flavor) = match parse_operator_name(name) {
        Ok(t) => t,
        Err(e) => return fail_error(e),
    };
    let order = match FracOrder::<f64>::from_f64(alpha) {
        Ok(o) => o,
        Err(e) => return fail_error(e),
    };
    let anchor = match exact_base(anchor) {
        Ok(a) => a,
        Err(s) => return s,
    };
    let spec = OperatorSpec::new(direction, side, flavor, order, anchor);
    match spec.apply(&(*f).inner) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(DfcGridFn { inner: result }));
            DfcStatus::Ok
        }
        Err(e) => fail_error(e),
    }
}

fn exactify(f: &GridFunction<f64>) -> Result<GridFunction<BigRational>, DfcStatus> {
    let values = f
        .values()
        .iter()
        .map(|v| BigRational::from_float(*v))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| {
            fail(DfcStatus::InvalidArgument, "values must be finite".into())
        })?;
    GridFunction::new(f.grid().clone(), values).map_err(fail_error)
}

fn exact_order(num: i64, den: i64) -> Result<FracOrder<BigRational>, DfcStatus> {
    if den == 0 {
        return Err(fail(DfcStatus::InvalidArgument, "zero denominator".into()));
    }
    FracOrder::from_ratio(num, den).map_err(fail_error)
}

/// Check one operator identity on `f` with the exact rational backend
/// (`alpha = alpha_num / alpha_den`; `p` parameterizes the p-indexed
/// identities). `exact_pass` is 1 iff the deviation is exactly zero;
/// `max_dev` receives the deviation rounded to the nearest double.
///
/// # Safety
/// Pointer arguments must be valid as for the other entry points.
#[no_mangle]
pub unsafe extern "C" fn dfc_check_identity(
    id: *const c_char,
    alpha_num: i64,
    alpha_den: i64,
    p: u32,
    f: *const DfcGridFn,
    max_dev: *mut f64,
    points_checked: *mut usize,
    exact_pass: *mut i32,
) -> DfcStatus {
    if f.is_null() || max_dev.is_null() || points_checked.is_null() || exact_pass.is_null() {
        return fail(DfcStatus::NullArgument, "null pointer".into());
    }
    let id = match str_arg(id).and_then(|s| IdentityId::parse(s).map_err(fail_error)) {
        Ok(v) => v,
        Err(st) => return st,
    };
    let alpha = match exact_order(alpha_num, alpha_den) {
        Ok(a) => a,
        Err(s) => return s,
    };
    let fx = match exactify(&(*f).inner) {
        Ok(v) => v,
        Err(s) => return s,
    };
    match check_identity(id, &fx, &alpha, p, 0.0) {
        Ok(report) => {
            *max_dev = report.max_dev_f64;
            *points_checked = report.points_checked;
            *exact_pass = report.exact_pass.unwrap_or(false) as i32;
            DfcStatus::Ok
        }
        Err(e) => fail_error(e),
    }
}

/// Evaluate one summation-by-parts theorem
/// (`SBP_{CAPUTO|RL}_{LEFT|RIGHT}`) on `f`, `g` with the exact backend.
///
/// # Safety
/// Pointer arguments must be valid as for the other entry points.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dfc_sbp(
    theorem: *const c_char,
    alpha_num: i64,
    alpha_den: i64,
    f: *const DfcGridFn,
    g: *const DfcGridFn,
    lhs: *mut f64,
    rhs_boundary: *mut f64,
    rhs_sum: *mut f64,
    deviation: *mut f64,
    exact_pass: *mut i32,
) -> DfcStatus {
    if f.is_null()
        || g.is_null()
        || lhs.is_null()
        || rhs_boundary.is_null()
        || rhs_sum.is_null()
        || deviation.is_null()
        || exact_pass.is_null()
    {
        return fail(DfcStatus::NullArgument, "null pointer".into());
    }
    let theorem = match str_arg(theorem).and_then(|s| SbpTheorem::parse(s).map_err(fail_error)) {
        Ok(v) => v,
        Err(st) => return st,
    };
    let alpha = match exact_order(alpha_num, alpha_den) {
        Ok(a) => a,
        Err(s) => return s,
    };
    let fx = match exactify(&(*f).inner) {
        Ok(v) => v,
        Err(s) => return s,
    };
    let gx = match exactify(&(*g).inner) {
        Ok(v) => v,
        Err(s) => return s,
    };
    match sbp(theorem, &fx, &gx, &alpha) {
        Ok(report) => {
            let dev = report.deviation();
            *lhs = report.lhs.to_f64();
            *rhs_boundary = report.rhs_boundary.to_f64();
            *rhs_sum = report.rhs_sum.to_f64();
            *deviation = dev.to_f64();
            *exact_pass = dev.is_zero() as i32;
            DfcStatus::Ok
        }
        Err(e) => fail_error(e),
    }
}
