//! C ABI for `rnd-core`.
//!
//! Measures and kernels live behind opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns an
//! [`RndStatus`]; on failure `rnd_last_error_message` describes what went
//! wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use rnd_core::info::identity_rhs;
use rnd_core::theorems::check_rn_construction;
use rnd_core::verify::{run_verify, VerifyOptions};
use rnd_core::{
    kl_divergence, lautum_information, mutual_information, rnd, ConditionalKernel, Error,
    ProbabilityMeasure, SampleSpace, SignedMeasure, TheoremId,
};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RndStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotAbsolutelyContinuous = 3,
    Domain = 4,
    Parse = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A finite signed measure on the points `0..n`.
pub struct RndMeasure {
    inner: SignedMeasure,
}

/// A row-stochastic kernel from `0..nx` to `0..ny`.
pub struct RndKernel {
    inner: ConditionalKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> RndStatus {
    match e {
        Error::NotAbsolutelyContinuous { .. } => RndStatus::NotAbsolutelyContinuous,
        Error::Domain(_) => RndStatus::Domain,
        Error::Parse(_) | Error::Json(_) => RndStatus::Parse,
        _ => RndStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics for `rnd_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), RndStatusError>) -> RndStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RndStatus::Ok,
        Ok(Err(RndStatusError(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RndStatus::Panic
        }
    }
}

struct RndStatusError(RndStatus, String);

impl From<Error> for RndStatusError {
    fn from(e: Error) -> Self {
        RndStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> RndStatusError {
    RndStatusError(RndStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, RndStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn values<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], RndStatusError> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), RndStatusError> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn probability(m: &RndMeasure) -> Result<ProbabilityMeasure, RndStatusError> {
    Ok(ProbabilityMeasure::try_from(m.inner.clone())?)
}

/// Last error on this thread, or NULL. The pointer stays valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rnd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Signed measure with `n` point weights.
///
/// # Safety
/// `weights` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_measure_new(
    weights: *const f64,
    n: usize,
    out: *mut *mut RndMeasure,
) -> RndStatus {
    guard(|| {
        let w = values(weights, n, "weights")?;
        let inner = SignedMeasure::from_weights(w.to_vec())?;
        write(out, Box::into_raw(Box::new(RndMeasure { inner })))
    })
}

/// Probability measure: weights must be nonnegative and sum to one within
/// `1e-9`; they are renormalized.
///
/// # Safety
/// As for [`rnd_measure_new`].
#[no_mangle]
pub unsafe extern "C" fn rnd_probability_new(
    weights: *const f64,
    n: usize,
    out: *mut *mut RndMeasure,
) -> RndStatus {
    guard(|| {
        let w = values(weights, n, "weights")?;
        let inner = ProbabilityMeasure::from_weights(w.to_vec())?.into_signed();
        write(out, Box::into_raw(Box::new(RndMeasure { inner })))
    })
}

/// # Safety
/// `m` must come from a `*_new` call and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn rnd_measure_free(m: *mut RndMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rnd_measure_len(m: *const RndMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.inner.len())
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_measure_total_mass(m: *const RndMeasure, out: *mut f64) -> RndStatus {
    guard(|| write(out, borrow(m, "measure")?.inner.total_mass()))
}

/// Whether every point `q` leaves uncharged is uncharged by `p`.
///
/// # Safety
/// `p`, `q` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_measure_is_absolutely_continuous(
    p: *const RndMeasure,
    q: *const RndMeasure,
    out: *mut bool,
) -> RndStatus {
    guard(|| {
        let (p, q) = (borrow(p, "P")?, borrow(q, "Q")?);
        let witness = p.inner.absolute_continuity_witness(&q.inner)?;
        write(out, witness.is_none())
    })
}

/// Writes `dP/dQ` into `out[0..len]`, with 0 at points `Q` does not charge.
///
/// # Safety
/// `p`, `q` must be live handles; `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rnd_derivative(
    p: *const RndMeasure,
    q: *const RndMeasure,
    out: *mut f64,
    len: usize,
) -> RndStatus {
    guard(|| {
        let (p, q) = (borrow(p, "P")?, borrow(q, "Q")?);
        let g = rnd(&p.inner, &q.inner)?;
        if len < g.values().len() {
            return Err(RndStatusError(
                RndStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", g.values().len()),
            ));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(g.values().as_ptr(), out, g.values().len());
        Ok(())
    })
}

/// `D(P || Q)` in nats for two probability measures.
///
/// # Safety
/// `p`, `q` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_kl_divergence(
    p: *const RndMeasure,
    q: *const RndMeasure,
    out: *mut f64,
) -> RndStatus {
    guard(|| {
        let p = probability(borrow(p, "P")?)?;
        let q = probability(borrow(q, "Q")?)?;
        write(out, kl_divergence(&p, &q)?)
    })
}

/// Kernel from a row-major `nx` by `ny` matrix whose rows sum to one.
///
/// # Safety
/// `rows` must point to `nx * ny` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_kernel_new(
    rows: *const f64,
    nx: usize,
    ny: usize,
    out: *mut *mut RndKernel,
) -> RndStatus {
    guard(|| {
        let len = nx.checked_mul(ny).ok_or_else(|| {
            RndStatusError(RndStatus::InvalidArgument, "kernel size overflows".into())
        })?;
        let w = values(rows, len, "rows")?;
        let x = Arc::new(SampleSpace::indexed(nx)?);
        let y = Arc::new(SampleSpace::indexed(ny)?);
        let matrix = if ny == 0 {
            vec![Vec::new(); nx]
        } else {
            w.chunks(ny).map(<[f64]>::to_vec).collect()
        };
        let inner = ConditionalKernel::new(x, y, matrix)?;
        write(out, Box::into_raw(Box::new(RndKernel { inner })))
    })
}

/// # Safety
/// `k` must come from [`rnd_kernel_new`] and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn rnd_kernel_free(k: *mut RndKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

fn kernel_input<'a>(
    k: *const RndKernel,
    px: *const RndMeasure,
) -> Result<(&'a ConditionalKernel, ProbabilityMeasure), RndStatusError> {
    let k = unsafe { borrow(k, "kernel")? };
    let px = unsafe { borrow(px, "P_X")? };
    let px = probability(px)?;
    let px =
        ProbabilityMeasure::normalized(Arc::clone(k.inner.input_space()), px.weights().to_vec())?;
    Ok((&k.inner, px))
}

/// Mutual information in nats.
///
/// # Safety
/// `k`, `px` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_mutual_information(
    k: *const RndKernel,
    px: *const RndMeasure,
    out: *mut f64,
) -> RndStatus {
    guard(|| {
        let (k, px) = kernel_input(k, px)?;
        write(out, mutual_information(k, &px)?.value)
    })
}

/// Lautum information in nats.
///
/// # Safety
/// `k`, `px` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_lautum_information(
    k: *const RndKernel,
    px: *const RndMeasure,
    out: *mut f64,
) -> RndStatus {
    guard(|| {
        let (k, px) = kernel_input(k, px)?;
        write(out, lautum_information(k, &px)?.value)
    })
}

/// Right-hand side of the `I + L` identity for reference measure `q`.
///
/// # Safety
/// `k`, `px`, `q` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_identity_rhs(
    k: *const RndKernel,
    px: *const RndMeasure,
    q: *const RndMeasure,
    out: *mut f64,
) -> RndStatus {
    guard(|| {
        let (k, px) = kernel_input(k, px)?;
        let q = borrow(q, "Q")?;
        let q = SignedMeasure::new(Arc::clone(k.output_space()), q.inner.weights().to_vec())?;
        write(out, identity_rhs(k, &px, &q)?)
    })
}

/// Checks `P(A) = integral over A of dP/dQ dQ` on every subset; writes the
/// worst relative deviation and whether it is within `1e-12`.
///
/// # Safety
/// `p`, `q` must be live handles; `max_deviation` and `pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_check_rn_construction(
    p: *const RndMeasure,
    q: *const RndMeasure,
    max_deviation: *mut f64,
    pass: *mut bool,
) -> RndStatus {
    guard(|| {
        let report = check_rn_construction(&borrow(p, "P")?.inner, &borrow(q, "Q")?.inner)?;
        write(max_deviation, report.max_deviation)?;
        write(pass, report.pass)
    })
}

/// Runs the generated-instance suite and returns the JSON report in
/// `*report`, to be released with [`rnd_string_free`]. `theorem` names one
/// theorem id, or NULL for all. `*all_pass` tells whether every check passed.
///
/// # Safety
/// `theorem` must be NULL or a NUL-terminated string; `report` and
/// `all_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rnd_verify(
    theorem: *const c_char,
    seed: u64,
    trials: usize,
    report: *mut *mut c_char,
    all_pass: *mut bool,
) -> RndStatus {
    guard(|| {
        if trials == 0 {
            return Err(RndStatusError(
                RndStatus::InvalidArgument,
                "trials must be positive".into(),
            ));
        }
        let theorems = if theorem.is_null() {
            TheoremId::ALL.to_vec()
        } else {
            let name = CStr::from_ptr(theorem)
                .to_str()
                .map_err(|e| RndStatusError(RndStatus::Parse, e.to_string()))?;
            vec![name.parse::<TheoremId>()?]
        };
        let result = run_verify(&VerifyOptions::new(theorems, seed, trials))?;
        let text = serde_json::to_string_pretty(&result).map_err(Error::from)?;
        let text = CString::new(text).expect("JSON has no nul bytes");
        write(all_pass, result.pass)?;
        write(report, text.into_raw())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rnd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
