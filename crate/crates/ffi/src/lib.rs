//! C ABI over the `qjsd` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `qjsd_build` and released with the matching `*_free`. Every fallible call
//! returns a [`QjsdStatus`]; on failure the message is available from
//! [`qjsd_last_error`] on the same thread until the next failing call.
//! Matrices are passed as separate row-major real and imaginary arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qjsd::linalg::{CMatrix, CVector};
use qjsd::qjsd::{build_qjsd, BuildOptions, DiscreteQjsd, HashingSpec, OperatorMeasure};
use qjsd::spectral::{DensityOperator, HermitianOperator};
use qjsd::transform::{faithfulness_rank, quasi_classicalise};
use qjsd::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QjsdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotHermitian = 3,
    InvalidState = 4,
    DimensionMismatch = 5,
    InvalidHashing = 6,
    ResourceBudget = 7,
    DegenerateConditioning = 8,
    BufferTooSmall = 9,
    NonFinite = 10,
    Internal = 11,
}

impl From<&Error> for QjsdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotHermitian { .. } => QjsdStatus::NotHermitian,
            Error::InvalidState { .. } => QjsdStatus::InvalidState,
            Error::DimensionMismatch { .. } => QjsdStatus::DimensionMismatch,
            Error::InvalidHashing(_) => QjsdStatus::InvalidHashing,
            Error::ResourceBudget { .. } => QjsdStatus::ResourceBudget,
            Error::DegenerateConditioning { .. } | Error::DegeneratePostSelection { .. } => {
                QjsdStatus::DegenerateConditioning
            }
            Error::NonFinite { .. } => QjsdStatus::NonFinite,
            _ => QjsdStatus::InvalidArgument,
        }
    }
}

/// Observable handle.
pub struct QjsdOperator {
    inner: HermitianOperator,
}

/// Density operator handle.
pub struct QjsdState {
    inner: DensityOperator,
}

/// Hashing handle.
pub struct QjsdHashing {
    inner: HashingSpec,
}

/// Operator-valued distribution handle.
pub struct QjsdDistribution {
    inner: DiscreteQjsd,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(QjsdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QjsdStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, turning errors and panics into a status plus a stored message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QjsdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QjsdStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QjsdStatus::Internal
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn matrix(dim: usize, re: *const f64, im: *const f64) -> Result<CMatrix, Failure> {
    if dim == 0 {
        return Err(Failure(
            QjsdStatus::InvalidArgument,
            "dimension must be positive".into(),
        ));
    }
    let re = unsafe { slice(re, dim * dim, "re")? };
    let im = unsafe { slice(im, dim * dim, "im")? };
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        Complex64::new(re[r * dim + c], im[r * dim + c])
    }))
}

fn publish<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qjsd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qjsd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Hermitian `dim x dim` observable from row-major real and imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_operator_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QjsdOperator,
) -> QjsdStatus {
    guard(|| {
        let m = unsafe { matrix(dim, re, im)? };
        publish(
            out,
            QjsdOperator {
                inner: HermitianOperator::new(m)?,
            },
        )
    })
}

/// # Safety
/// `op` must be NULL or a handle from [`qjsd_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qjsd_operator_free(op: *mut QjsdOperator) {
    if !op.is_null() {
        drop(unsafe { Box::from_raw(op) });
    }
}

/// Density operator from a row-major matrix.
///
/// # Safety
/// As for [`qjsd_operator_new`].
#[no_mangle]
pub unsafe extern "C" fn qjsd_state_new_density(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QjsdState,
) -> QjsdStatus {
    guard(|| {
        let m = unsafe { matrix(dim, re, im)? };
        publish(
            out,
            QjsdState {
                inner: DensityOperator::new(m)?,
            },
        )
    })
}

/// Pure state `|psi><psi|`. A ket that is not normalised is rejected unless
/// `renormalize` is true.
///
/// # Safety
/// `re` and `im` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_state_new_ket(
    dim: usize,
    re: *const f64,
    im: *const f64,
    renormalize: bool,
    out: *mut *mut QjsdState,
) -> QjsdStatus {
    guard(|| {
        if dim == 0 {
            return Err(Failure(
                QjsdStatus::InvalidArgument,
                "dimension must be positive".into(),
            ));
        }
        let re = unsafe { slice(re, dim, "re")? };
        let im = unsafe { slice(im, dim, "im")? };
        let ket =
            CVector::from_iterator(dim, re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)));
        publish(
            out,
            QjsdState {
                inner: DensityOperator::from_ket(&ket, renormalize)?,
            },
        )
    })
}

/// # Safety
/// `state` must be NULL or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn qjsd_state_free(state: *mut QjsdState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Hashing preset: `kd`, `anti-kd`, `mh`, `alpha:<complex>` or `kappa:<real>`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_hashing_preset(
    name: *const c_char,
    out: *mut *mut QjsdHashing,
) -> QjsdStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = unsafe { CStr::from_ptr(name) }.to_str().map_err(|_| {
            Failure(
                QjsdStatus::InvalidArgument,
                "preset name is not UTF-8".into(),
            )
        })?;
        publish(
            out,
            QjsdHashing {
                inner: HashingSpec::preset(name)?,
            },
        )
    })
}

/// The alpha-family hashing for `alpha = re + i im`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_hashing_alpha(
    re: f64,
    im: f64,
    out: *mut *mut QjsdHashing,
) -> QjsdStatus {
    guard(|| {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Failure(
                QjsdStatus::InvalidArgument,
                "alpha must be finite".into(),
            ));
        }
        publish(
            out,
            QjsdHashing {
                inner: HashingSpec::alpha(Complex64::new(re, im)),
            },
        )
    })
}

/// # Safety
/// `hashing` must be NULL or a live hashing handle.
#[no_mangle]
pub unsafe extern "C" fn qjsd_hashing_free(hashing: *mut QjsdHashing) {
    if !hashing.is_null() {
        drop(unsafe { Box::from_raw(hashing) });
    }
}

/// Builds the distribution of `n_obs` observables, one per hashing axis.
///
/// # Safety
/// `obs` must point to `n_obs` live operator handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_build(
    hashing: *const QjsdHashing,
    obs: *const *const QjsdOperator,
    n_obs: usize,
    out: *mut *mut QjsdDistribution,
) -> QjsdStatus {
    guard(|| {
        let spec = unsafe { handle(hashing, "hashing")? };
        let handles = unsafe { slice(obs, n_obs, "obs")? };
        let ops = handles
            .iter()
            .map(|h| unsafe { handle(*h, "observable") }.map(|o| o.inner.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let q = build_qjsd(&spec.inner, &ops, &BuildOptions::default())?;
        publish(out, QjsdDistribution { inner: q })
    })
}

/// # Safety
/// `dist` must be NULL or a live distribution handle.
#[no_mangle]
pub unsafe extern "C" fn qjsd_distribution_free(dist: *mut QjsdDistribution) {
    if !dist.is_null() {
        drop(unsafe { Box::from_raw(dist) });
    }
}

/// Number of support points; 0 for a NULL handle.
///
/// # Safety
/// `dist` must be NULL or a live distribution handle.
#[no_mangle]
pub unsafe extern "C" fn qjsd_distribution_len(dist: *const QjsdDistribution) -> usize {
    unsafe { dist.as_ref() }.map_or(0, |d| d.inner.len())
}

/// Number of axes; 0 for a NULL handle.
///
/// # Safety
/// `dist` must be NULL or a live distribution handle.
#[no_mangle]
pub unsafe extern "C" fn qjsd_distribution_n_axes(dist: *const QjsdDistribution) -> usize {
    unsafe { dist.as_ref() }.map_or(0, |d| d.inner.n_axes())
}

/// Quasi-joint probabilities `Tr[W(x) rho]`, in support order. Writes
/// `len * n_axes` coordinates to `points` (row-major) and `len` values to
/// `re` / `im`. `capacity` is the number of support points the buffers hold.
///
/// # Safety
/// Buffers must be writable for `capacity` points as described.
#[no_mangle]
pub unsafe extern "C" fn qjsd_classicalise(
    dist: *const QjsdDistribution,
    state: *const QjsdState,
    points: *mut f64,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> QjsdStatus {
    guard(|| {
        let q = unsafe { handle(dist, "distribution")? };
        let rho = unsafe { handle(state, "state")? };
        let qjp = quasi_classicalise(&q.inner, &rho.inner)?;
        let n = q.inner.n_axes();
        if capacity < qjp.support.len() {
            return Err(Failure(
                QjsdStatus::BufferTooSmall,
                format!("need room for {} points, got {capacity}", qjp.support.len()),
            ));
        }
        if points.is_null() || re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        for (k, p) in qjp.support.iter().enumerate() {
            unsafe {
                for (j, x) in p.point.iter().enumerate() {
                    *points.add(k * n + j) = *x;
                }
                *re.add(k) = p.value.re;
                *im.add(k) = p.value.im;
            }
        }
        Ok(())
    })
}

/// Weak value `Tr[E_B(b) A rho] / Tr[E_B(b) rho]`.
///
/// # Safety
/// Handles must be live; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_weak_value(
    a: *const QjsdOperator,
    b: *const QjsdOperator,
    b_value: f64,
    state: *const QjsdState,
    threshold: f64,
    re: *mut f64,
    im: *mut f64,
) -> QjsdStatus {
    guard(|| {
        let (a, b) = unsafe { (handle(a, "a")?, handle(b, "b")?) };
        let rho = unsafe { handle(state, "state")? };
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let w = qjsd::stats::weak_value(&a.inner, &b.inner, b_value, &rho.inner, threshold)?;
        unsafe {
            *re = w.re;
            *im = w.im;
        }
        Ok(())
    })
}

/// Rank of the quasi-classicalisation map; full rank `dim^2` means faithful.
///
/// # Safety
/// `dist` must be live; `rank` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qjsd_faithfulness_rank(
    dist: *const QjsdDistribution,
    rank: *mut usize,
) -> QjsdStatus {
    guard(|| {
        let q = unsafe { handle(dist, "distribution")? };
        if rank.is_null() {
            return Err(null("rank"));
        }
        unsafe { *rank = faithfulness_rank(&q.inner) };
        Ok(())
    })
}
