//! C interface to the `ultraslow` solver.
//!
//! Objects are handed out as opaque pointers and released with the matching
//! `*_free`. Every fallible call returns a [`UsStatus`]; on failure the
//! message is kept per thread and can be read with [`us_last_error_message`].
//! Output arguments are left untouched unless the call returns `US_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use num_complex::Complex64;
use ultraslow::kernel::{choose_contour, eval_en_contour, eval_gn_contour, KernelConfig};
use ultraslow::solver::{solve, ProblemSpec};
use ultraslow::spectral::{build_exact_dirichlet, build_fd, EllipticCoefficients, Polynomial, SpectralBasis};
use ultraslow::special::mittag_leffler;
use ultraslow::weight::{make_box_weight, WeightFunction};
use ultraslow::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Invariant = 3,
    Numeric = 4,
    Dimension = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

impl From<&Error> for UsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain { .. } => UsStatus::Domain,
            Error::Invariant { .. } => UsStatus::Invariant,
            Error::Numeric { .. } => UsStatus::Numeric,
            Error::Dimension { .. } => UsStatus::Dimension,
            Error::Config { .. } => UsStatus::Config,
            Error::Io(_) => UsStatus::Io,
        }
    }
}

/// Opaque order-density handle.
pub struct UsWeight(WeightFunction);

/// Opaque eigenbasis handle.
pub struct UsBasis(Arc<SpectralBasis>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, records any error or panic, and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UsStatus::Ok
        }
        Ok(Err(Failure::Null(arg))) => {
            set_error(format!("null pointer passed for `{arg}`"));
            UsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            let status = UsStatus::from(&e);
            set_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            UsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn dimension(op: &'static str, expected: usize, found: usize) -> Failure {
    Failure::Lib(Error::Dimension { op, expected, found })
}

/// Message for the most recent failure on this thread, or null after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn us_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn us_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// μ ≡ value on [0, 1], with the concentration pair (alpha0, delta).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn us_weight_constant(value: f64, alpha0: f64, delta: f64, out: *mut *mut UsWeight) -> UsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let w = WeightFunction::constant(value, alpha0, delta)?;
        *out = Box::into_raw(Box::new(UsWeight(w)));
        Ok(())
    })
}

/// μ = 1/h on [alpha0 − h, alpha0], zero elsewhere.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn us_weight_box(alpha0: f64, h: f64, out: *mut *mut UsWeight) -> UsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = Box::into_raw(Box::new(UsWeight(make_box_weight(alpha0, h)?)));
        Ok(())
    })
}

/// Piecewise-constant μ: `values[i]` on `[breaks[i], breaks[i + 1])`.
/// `breaks` holds `pieces + 1` points running from 0 to 1.
///
/// # Safety
/// `breaks` and `values` must point to `pieces + 1` and `pieces` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn us_weight_piecewise_constant(
    breaks: *const f64,
    values: *const f64,
    pieces: usize,
    alpha0: f64,
    delta: f64,
    out: *mut *mut UsWeight,
) -> UsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let b = slice(breaks, pieces + 1, "breaks")?.to_vec();
        let v = slice(values, pieces, "values")?;
        let w = WeightFunction::piecewise(b, v.iter().map(|&c| vec![c]).collect(), alpha0, delta, None, None)?;
        *out = Box::into_raw(Box::new(UsWeight(w)));
        Ok(())
    })
}

/// Releases a weight handle; null is ignored.
///
/// # Safety
/// `w` must come from a `us_weight_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn us_weight_free(w: *mut UsWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// μ(alpha).
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn us_weight_density(w: *const UsWeight, alpha: f64, out: *mut f64) -> UsStatus {
    guard(|| {
        let w = deref(w, "w")?;
        let out = out_ref(out, "out")?;
        *out = w.0.eval_mu(alpha)?;
        Ok(())
    })
}

/// s·w(s) = ∫ s^α μ(α) dα at s = re + i·im, off the closed negative axis.
///
/// # Safety
/// `w` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn us_weight_symbol(
    w: *const UsWeight,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> UsStatus {
    guard(|| {
        let w = deref(w, "w")?;
        let out_re = out_ref(out_re, "out_re")?;
        let out_im = out_ref(out_im, "out_im")?;
        let v = w.0.eval_sw(Complex64::new(re, im))?;
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Exact Dirichlet sine basis of −u'' on (0, length).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn us_basis_dirichlet(length: f64, modes: usize, out: *mut *mut UsBasis) -> UsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = Box::into_raw(Box::new(UsBasis(Arc::new(build_exact_dirichlet(length, modes)?))));
        Ok(())
    })
}

/// Finite-difference basis of −∂(c_a·a ∂u) + q u with polynomial a and q
/// (coefficients in increasing degree).
///
/// # Safety
/// `a` and `q` must point to `a_len` and `q_len` doubles; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn us_basis_fd(
    a: *const f64,
    a_len: usize,
    q: *const f64,
    q_len: usize,
    c_a: f64,
    length: f64,
    points: usize,
    modes: usize,
    out: *mut *mut UsBasis,
) -> UsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let a = Polynomial(slice(a, a_len, "a")?.to_vec());
        let q = Polynomial(slice(q, q_len, "q")?.to_vec());
        let coeffs = EllipticCoefficients::new(a, q, c_a, length)?;
        *out = Box::into_raw(Box::new(UsBasis(Arc::new(build_fd(&coeffs, points, modes)?))));
        Ok(())
    })
}

/// Releases a basis handle; null is ignored.
///
/// # Safety
/// `b` must come from a `us_basis_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn us_basis_free(b: *mut UsBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Number of retained modes, or 0 for a null handle.
///
/// # Safety
/// `b` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn us_basis_modes(b: *const UsBasis) -> usize {
    b.as_ref().map_or(0, |b| b.0.eigenvalues().len())
}

/// Copies the eigenvalues into `out`, which must hold `len` ≥ modes doubles.
///
/// # Safety
/// `b` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn us_basis_eigenvalues(b: *const UsBasis, out: *mut f64, len: usize) -> UsStatus {
    guard(|| {
        let b = deref(b, "b")?;
        let eig = b.0.eigenvalues();
        if len < eig.len() {
            return Err(dimension("us_basis_eigenvalues", eig.len(), len));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        std::slice::from_raw_parts_mut(out, eig.len()).copy_from_slice(eig);
        Ok(())
    })
}

fn kernel_value(w: &WeightFunction, lambda: f64, t: f64, response: bool) -> Result<f64, Failure> {
    let cfg = KernelConfig::default();
    let spec = choose_contour(t, lambda, w, &cfg)?;
    Ok(if response { eval_gn_contour(lambda, t, w, &spec)? } else { eval_en_contour(lambda, t, w, &spec)? })
}

/// Relaxation kernel for eigenvalue `lambda` at time `t > 0`; equals 1 at t = 0+.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn us_relaxation(w: *const UsWeight, lambda: f64, t: f64, out: *mut f64) -> UsStatus {
    guard(|| {
        let w = deref(w, "w")?;
        let out = out_ref(out, "out")?;
        *out = kernel_value(&w.0, lambda, t, false)?;
        Ok(())
    })
}

/// Source response kernel for eigenvalue `lambda` at time `t > 0`.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn us_response(w: *const UsWeight, lambda: f64, t: f64, out: *mut f64) -> UsStatus {
    guard(|| {
        let w = deref(w, "w")?;
        let out = out_ref(out, "out")?;
        *out = kernel_value(&w.0, lambda, t, true)?;
        Ok(())
    })
}

/// Two-parameter Mittag-Leffler function for alpha in (0, 1] and z ≤ 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn us_mittag_leffler(alpha: f64, beta: f64, z: f64, out: *mut f64) -> UsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = mittag_leffler(alpha, beta, z)?;
        Ok(())
    })
}

/// Source-free solve. `initial` holds the basis coefficients of u₀ (length
/// equal to the mode count); `out` receives `times_len × modes` coefficients,
/// row by row in the order of `times`.
///
/// # Safety
/// All pointers must be valid for the stated lengths.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn us_solve_homogeneous(
    w: *const UsWeight,
    b: *const UsBasis,
    initial: *const f64,
    initial_len: usize,
    times: *const f64,
    times_len: usize,
    out: *mut f64,
    out_len: usize,
) -> UsStatus {
    guard(|| {
        let w = deref(w, "w")?;
        let b = deref(b, "b")?;
        let modes = b.0.eigenvalues().len();
        if initial_len != modes {
            return Err(dimension("us_solve_homogeneous", modes, initial_len));
        }
        if out_len < times_len * modes {
            return Err(dimension("us_solve_homogeneous", times_len * modes, out_len));
        }
        let initial = slice(initial, initial_len, "initial")?.to_vec();
        let times = slice(times, times_len, "times")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let horizon = times.iter().cloned().fold(0.0, f64::max);
        let problem = ProblemSpec::new(w.0.clone(), b.0.clone(), initial, horizon)?;
        let field = solve(&problem, times)?;
        let dst = std::slice::from_raw_parts_mut(out, times_len * modes);
        for (row, c) in dst.chunks_mut(modes).zip(&field.coeffs) {
            row.copy_from_slice(c);
        }
        Ok(())
    })
}
