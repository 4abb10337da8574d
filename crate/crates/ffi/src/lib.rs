//! C interface to `weightlab`.
//!
//! Objects are opaque handles created by `wl_*_new`/`wl_*_parse` functions
//! and released with the matching `wl_*_free`. Every fallible call returns a
//! `WlStatus`; on failure `wl_last_error_message` describes the error on the
//! calling thread. Strings returned by the library are freed with
//! `wl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use weightlab::conditions::annulus_norm;
use weightlab::func::Pow;
use weightlab::geometry::{Cube, Cutoff};
use weightlab::spaces::FunctionSpace;
use weightlab::weights::{power_log_sigma, theorem_weights, Weight};
use weightlab::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    NonConvergent = 4,
    Degenerate = 5,
    Panic = 6,
    Internal = 7,
}

/// A weight on R^n.
pub struct WlWeight(Weight);

/// A Banach function space (Lebesgue or Orlicz).
pub struct WlSpace(FunctionSpace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WlStatus {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::Origin => WlStatus::InvalidArgument,
        Error::Parse(_) => WlStatus::Parse,
        Error::NonConvergent { .. } | Error::RootNotFound(_) => WlStatus::NonConvergent,
        Error::Degenerate(_) | Error::EmptyFamily | Error::NoContainingCube | Error::EmptyBundle => {
            WlStatus::Degenerate
        }
        _ => WlStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (WlStatus, String)>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside weightlab".into());
            WlStatus::Panic
        }
    }
}

fn lib<T>(r: weightlab::Result<T>) -> Result<T, (WlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (WlStatus, String)> {
    if p.is_null() {
        Err((WlStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn put<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before calling.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message describing the most recent call on this thread if it failed,
/// otherwise null. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn wl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The counterexample weight `w` (`which = 0`) or `σ` (`which = 1`) for exponent `p` in dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_theorem(p: f64, n: usize, which: u32, out: *mut *mut WlWeight) -> WlStatus {
    guard(|| {
        non_null(out, "out")?;
        let (w, s) = lib(theorem_weights(p, n))?;
        let chosen = match which {
            0 => w,
            1 => s,
            _ => return Err((WlStatus::InvalidArgument, format!("which must be 0 or 1, got {which}"))),
        };
        put(out, WlWeight(chosen));
        Ok(())
    })
}

/// `|x|^{-α} (1 + log_+ 1/|x|)^{-β}` with `0 < α < n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_power_log(alpha: f64, beta: f64, n: usize, out: *mut *mut WlWeight) -> WlStatus {
    guard(|| {
        non_null(out, "out")?;
        put(out, WlWeight(lib(power_log_sigma(alpha, beta, n))?));
        Ok(())
    })
}

/// The constant weight `c >= 0`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_constant(n: usize, c: f64, out: *mut *mut WlWeight) -> WlStatus {
    guard(|| {
        non_null(out, "out")?;
        put(out, WlWeight(lib(Weight::constant(n, c))?));
        Ok(())
    })
}

/// Evaluate a weight at `x[0..len]`; `len` must equal the dimension. Fails at
/// the origin for non-constant weights.
///
/// # Safety
/// `w` must be a live handle, `x` must point to `len` doubles and `out` to a double.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_eval(w: *const WlWeight, x: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        non_null(w, "weight")?;
        non_null(x, "x")?;
        non_null(out, "out")?;
        let pt = std::slice::from_raw_parts(x, len);
        *out = lib((*w).0.eval_checked(pt))?;
        Ok(())
    })
}

/// Dimension of a weight, 0 for a null handle.
///
/// # Safety
/// `w` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_dim(w: *const WlWeight) -> usize {
    if w.is_null() {
        0
    } else {
        (*w).0.dim()
    }
}

/// # Safety
/// `w` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_free(w: *mut WlWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Parse a space descriptor such as `lebesgue:r=3` or `orlicz:pprime=3,gamma=2.5`.
///
/// # Safety
/// `descriptor` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_space_parse(descriptor: *const c_char, out: *mut *mut WlSpace) -> WlStatus {
    guard(|| {
        non_null(descriptor, "descriptor")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(descriptor)
            .to_str()
            .map_err(|_| (WlStatus::Parse, "descriptor is not UTF-8".to_string()))?;
        put(out, WlSpace(lib(text.parse())?));
        Ok(())
    })
}

/// The associate space `X'`.
///
/// # Safety
/// `x` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_space_associate(x: *const WlSpace, out: *mut *mut WlSpace) -> WlStatus {
    guard(|| {
        non_null(x, "space")?;
        non_null(out, "out")?;
        put(out, WlSpace(lib((*x).0.associate())?));
        Ok(())
    })
}

/// Canonical descriptor of a space; free with `wl_string_free`. Null on a null handle.
///
/// # Safety
/// `x` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_space_descriptor(x: *const WlSpace) -> *mut c_char {
    if x.is_null() {
        return ptr::null_mut();
    }
    CString::new((*x).0.to_string()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `x` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wl_space_free(x: *mut WlSpace) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// `‖w^e‖_{X,Q}` on the origin cube of sidelength `side`, restricted to
/// `|x|_max >= eps` (`eps = 0` for no truncation). `divergent` is set to 1
/// when the norm is infinite as far as the computation can tell.
///
/// # Safety
/// Handles must be live; `value` and `divergent` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wl_norm_on_origin_cube(
    x: *const WlSpace,
    w: *const WlWeight,
    exponent: f64,
    side: f64,
    eps: f64,
    value: *mut f64,
    divergent: *mut u8,
) -> WlStatus {
    guard(|| {
        non_null(x, "space")?;
        non_null(w, "weight")?;
        non_null(value, "value")?;
        non_null(divergent, "divergent")?;
        if eps.is_nan() || eps < 0.0 {
            return Err((WlStatus::InvalidArgument, format!("eps must be >= 0, got {eps}")));
        }
        let weight = &(*w).0;
        let q = lib(Cube::origin(weight.dim(), side))?;
        let f = Pow::new(weight, exponent);
        let cutoff = if eps == 0.0 { Cutoff::NONE } else { Cutoff::radius(eps) };
        let nv = lib((*x).0.norm_on_cube(&f, &q, cutoff))?;
        *value = nv.value;
        *divergent = u8::from(nv.divergent);
        Ok(())
    })
}

/// `‖χ_{Q(0,1) \ Q(0,a/2)}(y) |y|_max^{-n/p}‖` in the space `xprime`.
///
/// # Safety
/// `xprime` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_annulus_norm(xprime: *const WlSpace, a: f64, p: f64, n: usize, value: *mut f64) -> WlStatus {
    guard(|| {
        non_null(xprime, "space")?;
        non_null(value, "value")?;
        let nv = lib(annulus_norm(&(*xprime).0, a, p, n))?;
        if nv.divergent {
            return Err((WlStatus::NonConvergent, "annulus norm is divergent".into()));
        }
        *value = nv.value;
        Ok(())
    })
}
