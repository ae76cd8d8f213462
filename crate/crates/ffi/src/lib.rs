//! C interface: opaque expression handles, status codes and heap strings owned by the library.
//!
//! Every function returns a [`CdStatus`]. On failure the message is kept per thread and can be
//! read with [`cd_last_error`]. Strings returned through out-pointers must be released with
//! [`cd_string_free`], handles with [`cd_expr_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cantor_density::cli::resolve_expr;
use cantor_density::measure::density::{density_verdict_with, CERTAINTY};
use cantor_density::measure::interval::measure_exact;
use cantor_density::rational::parse_q;
use cantor_density::sets::expr::serialize;
use cantor_density::sets::member::{member_at_depth, Verdict};
use cantor_density::{Error, Expr, Lasso};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Precision = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdVerdict {
    Out = 0,
    In = 1,
    Unknown = 2,
}

/// An opaque set expression.
pub struct CdExpr {
    expr: Expr,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CdStatus {
    match e {
        Error::Parse(_) => CdStatus::Parse,
        Error::Precision { .. } => CdStatus::Precision,
        _ => CdStatus::Domain,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CdStatus>) -> CdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            CdStatus::Panic
        }
    }
}

fn lift<T>(r: cantor_density::Result<T>) -> Result<T, CdStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, CdStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        return Err(CdStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        CdStatus::InvalidUtf8
    })
}

unsafe fn handle<'a>(h: *const CdExpr) -> Result<&'a CdExpr, CdStatus> {
    h.as_ref().ok_or_else(|| {
        set_error("null expression handle");
        CdStatus::NullPointer
    })
}

fn check_out<T>(out: *mut T) -> Result<(), CdStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(CdStatus::NullPointer);
    }
    Ok(())
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Parse a DSL expression or a named construction (`@empty-interior`, ...).
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_expr_parse(text_ptr: *const c_char, out: *mut *mut CdExpr) -> CdStatus {
    guard(|| {
        check_out(out)?;
        let t = text(text_ptr)?;
        let expr = lift(resolve_expr(t))?;
        *out = Box::into_raw(Box::new(CdExpr { expr }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`cd_expr_parse`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cd_expr_free(h: *mut CdExpr) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// The canonical text of an expression.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_expr_serialize(h: *const CdExpr, out: *mut *mut c_char) -> CdStatus {
    guard(|| {
        check_out(out)?;
        *out = to_c(serialize(&handle(h)?.expr));
        Ok(())
    })
}

/// Measure within `tol` (a rational such as `1/1024`) as JSON `{"lo":"p/q","hi":"p/q"}`.
///
/// # Safety
/// `h` must be a live handle, `tol` a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_measure(h: *const CdExpr, tol: *const c_char, out: *mut *mut c_char) -> CdStatus {
    guard(|| {
        check_out(out)?;
        let e = handle(h)?;
        let tol = lift(parse_q(text(tol)?))?;
        let m = lift(measure_exact(&e.expr, &tol))?;
        *out = to_c(serde_json::to_string(&m).expect("serializable"));
        Ok(())
    })
}

/// Membership of the lasso `point` (e.g. `01(10)`) decided at `depth`.
///
/// # Safety
/// `h` must be a live handle, `point` a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_member(h: *const CdExpr, point: *const c_char, depth: usize, out: *mut CdVerdict) -> CdStatus {
    guard(|| {
        check_out(out)?;
        let e = handle(h)?;
        let x = lift(Lasso::parse(text(point)?))?;
        *out = match member_at_depth(&e.expr, &x, depth) {
            Verdict::In => CdVerdict::In,
            Verdict::Out => CdVerdict::Out,
            Verdict::Unknown => CdVerdict::Unknown,
        };
        Ok(())
    })
}

/// The density verdict at `point` as a label such as `ConvergesTo1`.
///
/// # Safety
/// `h` must be a live handle, `point` a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_density(h: *const CdExpr, point: *const c_char, budget: u32, out: *mut *mut c_char) -> CdStatus {
    guard(|| {
        check_out(out)?;
        let e = handle(h)?;
        let x = lift(Lasso::parse(text(point)?))?;
        *out = to_c(density_verdict_with(&e.expr, &x, budget, CERTAINTY).label());
        Ok(())
    })
}

/// The message of the last failed call on this thread, or null. Owned by the library and valid
/// until the next call.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
