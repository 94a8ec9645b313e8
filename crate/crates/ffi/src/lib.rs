//! C ABI over `chaoslab`.
//!
//! Every fallible function returns a status code and writes its result
//! through an out pointer. On failure, `chaoslab_last_error()` describes the
//! most recent error on the calling thread. Kernels are opaque handles owned by
//! the caller and released with `chaoslab_kernel_free`.

use chaoslab::chaos::ChaosVar;
use chaoslab::free::{free_moment, FreeChaosVar};
use chaoslab::gaussproc::{fbm_rho, sample_stationary, CovSeq};
use chaoslab::hermite::hermite_eval;
use chaoslab::kernels::Kernel;
use chaoslab::rng::GENERATOR_ID;
use chaoslab::stein::stein_eval;
use chaoslab::Error;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

pub const CHAOSLAB_OK: c_int = 0;
/// Null pointer, bad UTF-8 or a buffer of the wrong length.
pub const CHAOSLAB_ERR_ARGUMENT: c_int = 1;
/// Domain, shape and precondition errors; the CLI exits with the same code.
pub const CHAOSLAB_ERR_PRECONDITION: c_int = 2;
pub const CHAOSLAB_ERR_CAPACITY: c_int = 3;
pub const CHAOSLAB_ERR_IO: c_int = 4;
/// A Rust panic was caught at the boundary.
pub const CHAOSLAB_ERR_INTERNAL: c_int = 5;

/// Opaque handle to a dense coefficient table.
pub struct ChaoslabKernel(Kernel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Argument(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CHAOSLAB_OK,
        Ok(Err(Fail::Argument(msg))) => {
            set_error(msg);
            CHAOSLAB_ERR_ARGUMENT
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            e.exit_code()
        }
        Err(_) => {
            set_error("internal panic");
            CHAOSLAB_ERR_INTERNAL
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Argument("null output pointer"))
}

unsafe fn kernel_ref<'a>(k: *const ChaoslabKernel) -> Result<&'a Kernel, Fail> {
    k.as_ref()
        .map(|h| &h.0)
        .ok_or(Fail::Argument("null kernel handle"))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Argument("null path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail::Argument("path is not UTF-8"))
}

fn into_handle(k: Kernel) -> *mut ChaoslabKernel {
    Box::into_raw(Box::new(ChaoslabKernel(k)))
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chaoslab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Identifier of the random generator family, a static string.
#[no_mangle]
pub extern "C" fn chaoslab_generator_id() -> *const c_char {
    static ID: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    ID.get_or_init(|| CString::new(GENERATOR_ID).unwrap_or_default())
        .as_ptr()
}

/// Kernel of `order` over a basis of `dim` from `len = dim^order` row-major
/// coefficients.
///
/// # Safety
/// `coeffs` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_new(
    order: usize,
    dim: usize,
    coeffs: *const f64,
    len: usize,
    out: *mut *mut ChaoslabKernel,
) -> c_int {
    guard(|| {
        let out = out_ref(out)?;
        if coeffs.is_null() && len > 0 {
            return Err(Fail::Argument("null coefficient array"));
        }
        let data = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(coeffs, len).to_vec()
        };
        *out = into_handle(Kernel::from_coeffs(order, dim, data)?);
        Ok(())
    })
}

/// Load a kernel from CSV, or the binary layout when the name ends in `.bin`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_load(
    path: *const c_char,
    out: *mut *mut ChaoslabKernel,
) -> c_int {
    guard(|| {
        let out = out_ref(out)?;
        *out = into_handle(Kernel::load(&path_arg(path)?)?);
        Ok(())
    })
}

/// # Safety
/// `k` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_save(
    k: *const ChaoslabKernel,
    path: *const c_char,
) -> c_int {
    guard(|| {
        kernel_ref(k)?.save(&path_arg(path)?)?;
        Ok(())
    })
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `k` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_free(k: *mut ChaoslabKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// # Safety
/// `k` must be a live handle; `order` and `dim` writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_shape(
    k: *const ChaoslabKernel,
    order: *mut usize,
    dim: *mut usize,
) -> c_int {
    guard(|| {
        let k = kernel_ref(k)?;
        *out_ref(order)? = k.order();
        *out_ref(dim)? = k.dim();
        Ok(())
    })
}

/// Copy the `dim^order` coefficients into `buf`, which must hold exactly `len`.
///
/// # Safety
/// `k` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_coeffs(
    k: *const ChaoslabKernel,
    buf: *mut f64,
    len: usize,
) -> c_int {
    guard(|| {
        let c = kernel_ref(k)?.coeffs();
        if buf.is_null() || len != c.len() {
            return Err(Fail::Argument("buffer length must equal dim^order"));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(c);
        Ok(())
    })
}

/// # Safety
/// `k` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_symmetrize(
    k: *const ChaoslabKernel,
    out: *mut *mut ChaoslabKernel,
) -> c_int {
    guard(|| {
        let s = kernel_ref(k)?.symmetrize()?;
        *out_ref(out)? = into_handle(s);
        Ok(())
    })
}

/// Contraction `f ⊗_r g` pairing the last `r` arguments of each kernel.
///
/// # Safety
/// `f` and `g` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_kernel_contract(
    f: *const ChaoslabKernel,
    g: *const ChaoslabKernel,
    r: usize,
    out: *mut *mut ChaoslabKernel,
) -> c_int {
    guard(|| {
        let c = kernel_ref(f)?.contract(kernel_ref(g)?, r)?;
        *out_ref(out)? = into_handle(c);
        Ok(())
    })
}

/// Exact cumulant `κ_s(I_q(f))`.
///
/// # Safety
/// `k` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_chaos_cumulant(
    k: *const ChaoslabKernel,
    s: usize,
    out: *mut f64,
) -> c_int {
    guard(|| {
        let v = ChaosVar::new(kernel_ref(k)?.clone())?.cumulant_exact(s)?;
        *out_ref(out)? = v;
        Ok(())
    })
}

/// Free moment `φ(F^m)` of the Wigner integral of a mirror-symmetric kernel.
///
/// # Safety
/// `k` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_free_moment(
    k: *const ChaoslabKernel,
    m: usize,
    out: *mut f64,
) -> c_int {
    guard(|| {
        let v = free_moment(&FreeChaosVar::new(kernel_ref(k)?.clone())?, m)?;
        *out_ref(out)? = v;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_hermite_eval(q: usize, x: f64, out: *mut f64) -> c_int {
    guard(|| {
        *out_ref(out)? = hermite_eval(q, x)?;
        Ok(())
    })
}

/// Stein solution `f_x(u)` and its derivative.
///
/// # Safety
/// `f` and `df` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_stein_eval(x: f64, u: f64, f: *mut f64, df: *mut f64) -> c_int {
    guard(|| {
        let (a, b) = stein_eval(x, u);
        *out_ref(f)? = a;
        *out_ref(df)? = b;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_fbm_rho(hurst: f64, lag: i64, out: *mut f64) -> c_int {
    guard(|| {
        *out_ref(out)? = fbm_rho(hurst, lag)?;
        Ok(())
    })
}

/// Unit-variance fBm increments of replicate `replicate` for `seed`, written
/// to `buf[0..n]`.
///
/// # Safety
/// `buf` must be writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn chaoslab_fbm_increments(
    hurst: f64,
    n: usize,
    seed: u64,
    replicate: u64,
    buf: *mut f64,
) -> c_int {
    guard(|| {
        if buf.is_null() {
            return Err(Fail::Argument("null output buffer"));
        }
        let (path, _) = sample_stationary(&CovSeq::fbm(hurst)?, n, seed, replicate)?;
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&path);
        Ok(())
    })
}
