//! C ABI over the `treecal` forecaster and its metrics.
//!
//! Handles are opaque and owned by the caller until passed to the matching `*_free`.
//! Every fallible call returns a [`TcStatus`]; on failure [`tc_last_error`] describes
//! the cause for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use treecal::engine::{Forecaster, TreeCal, TreeParams};
use treecal::geometry::{Domain, NormKind, Vector};
use treecal::metrics::{calibration_error, Distance, Forecast, Transcript};
use treecal::scoring::{bregman, Regularizer};
use treecal::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullPointer = 1,
    /// A point lies outside the domain, or a length or dimension does not match.
    Domain = 2,
    /// Invalid tree parameters or domain description.
    Config = 3,
    /// `forecast` and `observe` were called out of order or past the horizon.
    Protocol = 4,
    /// The caller's buffer cannot hold the result; the required size was written.
    BufferTooSmall = 5,
    Unsupported = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcDomainKind {
    /// Probability simplex in `d` coordinates; `a` and `b` are ignored.
    Simplex = 0,
    /// Euclidean ball of radius `a`.
    L2Ball = 1,
    /// L1 ball of radius `a`.
    L1Ball = 2,
    /// Box `[a, b]^d`.
    Box = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcNorm {
    L1 = 0,
    L2 = 1,
    LInf = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcRegularizer {
    Euclidean = 0,
    NegativeEntropy = 1,
}

/// A TreeCal forecaster together with the transcript of the rounds played so far.
pub struct TcTreeCal {
    domain: Domain,
    forecaster: TreeCal,
    transcript: Transcript,
    pending: Option<Forecast>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: TcStatus, msg: &str) -> TcStatus {
    set_last_error(msg);
    status
}

fn status_of(e: &Error) -> TcStatus {
    match e {
        Error::Domain(_) | Error::Bounds(_) => TcStatus::Domain,
        Error::Config(_) => TcStatus::Config,
        Error::Protocol(_) => TcStatus::Protocol,
        Error::Unsupported(_) => TcStatus::Unsupported,
        _ => TcStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status with a recorded message.
fn guard<F>(f: F) -> TcStatus
where
    F: FnOnce() -> Result<(), TcStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TcStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(TcStatus::Internal, "panic inside treecal"),
    }
}

fn lift<T>(r: treecal::Result<T>) -> Result<T, TcStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

unsafe fn read_vec(p: *const f64, d: usize, what: &str) -> Result<Vec<f64>, TcStatus> {
    if p.is_null() {
        return Err(fail(TcStatus::NullPointer, &format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, d).to_vec())
}

fn build_domain(kind: TcDomainKind, d: usize, a: f64, b: f64) -> treecal::Result<Domain> {
    match kind {
        TcDomainKind::Simplex => Domain::simplex(d),
        TcDomainKind::L2Ball => Domain::l2_ball(d, a),
        TcDomainKind::L1Ball => Domain::l1_ball(d, a),
        TcDomainKind::Box => Domain::cube(d, a, b),
    }
}

fn norm_of(n: TcNorm) -> NormKind {
    match n {
        TcNorm::L1 => NormKind::L1,
        TcNorm::L2 => NormKind::L2,
        TcNorm::LInf => NormKind::LInf,
    }
}

fn regularizer_of(r: TcRegularizer) -> Regularizer {
    match r {
        TcRegularizer::Euclidean => Regularizer::Euclidean,
        TcRegularizer::NegativeEntropy => Regularizer::negative_entropy(),
    }
}

/// Message for the last failed call on this thread, or null if none. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a TreeCal forecaster with arity `arity`, depth `depth` and horizon `horizon`
/// over the given domain, writing the handle to `*out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_new(
    kind: TcDomainKind,
    d: usize,
    a: f64,
    b: f64,
    horizon: usize,
    arity: usize,
    depth: usize,
    out: *mut *mut TcTreeCal,
) -> TcStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(TcStatus::NullPointer, "out is null"));
        }
        let domain = lift(build_domain(kind, d, a, b).map_err(|e| Error::Config(format!("invalid domain: {e}"))))?;
        let params = lift(TreeParams::new(horizon, arity, depth))?;
        let forecaster = lift(TreeCal::new(domain, params))?;
        let handle = TcTreeCal { domain, forecaster, transcript: Transcript::with_capacity(domain, horizon), pending: None };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from [`tc_treecal_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_free(h: *mut TcTreeCal) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the handle's domain, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_dim(h: *const TcTreeCal) -> usize {
    h.as_ref().map_or(0, |h| h.domain.dim())
}

/// Maximum number of atoms in a forecast (the tree depth), or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_max_atoms(h: *const TcTreeCal) -> usize {
    h.as_ref().map_or(0, |h| h.forecaster.params().depth)
}

/// Forecast for round `t` (1-based). Atom `i` is written to `points[i*d..(i+1)*d]` and
/// `weights[i]`. When `labels` is non-null, its node digits go to
/// `labels[i*depth..]` and their count to `label_lens[i]`. The atom count is written to
/// `*n_atoms`; if it exceeds `capacity`, nothing else is written,
/// `TC_STATUS_BUFFER_TOO_SMALL` is returned and the call may be repeated for the same round.
///
/// # Safety
/// `points` must hold `capacity * d` doubles, `weights` `capacity` doubles, and, when
/// non-null, `labels` `capacity * depth` integers and `label_lens` `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_forecast(
    h: *mut TcTreeCal,
    t: usize,
    points: *mut f64,
    weights: *mut f64,
    labels: *mut u32,
    label_lens: *mut usize,
    capacity: usize,
    n_atoms: *mut usize,
) -> TcStatus {
    guard(|| {
        let h = h.as_mut().ok_or_else(|| fail(TcStatus::NullPointer, "handle is null"))?;
        if points.is_null() || weights.is_null() || n_atoms.is_null() {
            return Err(fail(TcStatus::NullPointer, "output buffer is null"));
        }
        if labels.is_null() != label_lens.is_null() {
            return Err(fail(TcStatus::NullPointer, "labels and label_lens must both be given or both be null"));
        }
        // A retry after BufferTooSmall reuses the forecast already drawn for this round.
        let x = match &h.pending {
            Some(x) if t == h.forecaster.round() => x.clone(),
            _ => {
                let x = lift(h.forecaster.forecast(t))?;
                h.pending = Some(x.clone());
                x
            }
        };
        let atoms = x.atoms();
        *n_atoms = atoms.len();
        if atoms.len() > capacity {
            return Err(fail(
                TcStatus::BufferTooSmall,
                &format!("forecast has {} atoms, buffer holds {capacity}", atoms.len()),
            ));
        }
        let d = h.domain.dim();
        let depth = h.forecaster.params().depth;
        for (i, atom) in atoms.iter().enumerate() {
            ptr::copy_nonoverlapping(atom.point.as_slice().as_ptr(), points.add(i * d), d);
            *weights.add(i) = atom.weight;
            if !labels.is_null() {
                let digits = atom.label.as_ref().map_or(&[][..], |l| l.0.as_slice());
                ptr::copy_nonoverlapping(digits.as_ptr(), labels.add(i * depth), digits.len());
                *label_lens.add(i) = digits.len();
            }
        }
        Ok(())
    })
}

/// Reveals the outcome `y` (length `d`) of round `t`.
///
/// # Safety
/// `h` must be a live handle and `y` must point to `d` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_observe(h: *mut TcTreeCal, t: usize, y: *const f64) -> TcStatus {
    guard(|| {
        let h = h.as_mut().ok_or_else(|| fail(TcStatus::NullPointer, "handle is null"))?;
        let y = lift(Vector::new(read_vec(y, h.domain.dim(), "outcome")?))?;
        lift(h.forecaster.observe(t, &y))?;
        let x = h.pending.take().ok_or_else(|| fail(TcStatus::Internal, "observation without a stored forecast"))?;
        lift(h.transcript.push(x, y))?;
        Ok(())
    })
}

/// Number of completed rounds, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_rounds(h: *const TcTreeCal) -> usize {
    h.as_ref().map_or(0, |h| h.transcript.len())
}

/// Calibration error of the completed rounds under `norm` (squared when `squared` is
/// nonzero), grouping atoms by node label as well as point when `labeled` is nonzero.
///
/// # Safety
/// `h` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_calibration(
    h: *const TcTreeCal,
    norm: TcNorm,
    squared: bool,
    labeled: bool,
    out: *mut f64,
) -> TcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| fail(TcStatus::NullPointer, "handle is null"))?;
        if out.is_null() {
            return Err(fail(TcStatus::NullPointer, "out is null"));
        }
        let norm = norm_of(norm);
        let dist = if squared { Distance::SquaredNorm { norm } } else { Distance::Norm { norm } };
        *out = lift(calibration_error(&h.transcript, &dist, labeled))?;
        Ok(())
    })
}

/// Calibration error under the Bregman divergence of `reg`; with `labeled` this is the
/// full swap regret of the forecasts.
///
/// # Safety
/// `h` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn tc_treecal_bregman_calibration(
    h: *const TcTreeCal,
    reg: TcRegularizer,
    labeled: bool,
    out: *mut f64,
) -> TcStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| fail(TcStatus::NullPointer, "handle is null"))?;
        if out.is_null() {
            return Err(fail(TcStatus::NullPointer, "out is null"));
        }
        let dist = Distance::Bregman { regularizer: regularizer_of(reg) };
        *out = lift(calibration_error(&h.transcript, &dist, labeled))?;
        Ok(())
    })
}

/// `D_R(y | p)` for vectors of length `d`.
///
/// # Safety
/// `y` and `p` must point to `d` readable doubles and `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn tc_bregman(reg: TcRegularizer, y: *const f64, p: *const f64, d: usize, out: *mut f64) -> TcStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(TcStatus::NullPointer, "out is null"));
        }
        let y = read_vec(y, d, "y")?;
        let p = read_vec(p, d, "p")?;
        *out = lift(bregman(&regularizer_of(reg), &y, &p))?;
        Ok(())
    })
}
