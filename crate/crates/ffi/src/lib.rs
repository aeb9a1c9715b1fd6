//! C ABI for the bisectnet simulator.
//!
//! Beliefs are opaque handles created and destroyed by this library; every
//! fallible call returns a [`BnStatus`] and writes results through out
//! pointers. The most recent error message is kept per thread and can be
//! fetched with [`bn_last_error_message`].

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;

use bisectnet::belief::BeliefError;
use bisectnet::channel;
use bisectnet::config::ExperimentConfig;
use bisectnet::experiment;
use bisectnet::network::StochasticMatrix;
use bisectnet::Belief;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A numeric argument violated its documented range.
    InvalidArgument = 2,
    /// The query point was not the median of the belief.
    NotMedian = 3,
    /// The configuration document failed to parse or validate.
    InvalidConfig = 4,
    /// The run failed (I/O, topology generation, or invariant violation).
    RunFailed = 5,
    /// The input string was not valid UTF-8.
    InvalidUtf8 = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
}

fn belief_status(err: &BeliefError) -> BnStatus {
    match err {
        BeliefError::NotMedian { .. } => BnStatus::NotMedian,
        _ => BnStatus::InvalidArgument,
    }
}

/// Opaque posterior-density handle.
pub struct BnBelief {
    inner: Belief,
}

fn boxed(b: Belief) -> *mut BnBelief {
    Box::into_raw(Box::new(BnBelief { inner: b }))
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn bn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates the uniform prior over the unit interval. Never fails.
/// Free with [`bn_belief_free`].
#[no_mangle]
pub extern "C" fn bn_belief_uniform() -> *mut BnBelief {
    boxed(Belief::uniform())
}

/// Builds a belief from `n_breakpoints` ordered positions (first 0, last 1)
/// and `n_breakpoints - 1` nonnegative densities; the density is
/// renormalized to unit mass.
///
/// # Safety
/// `breakpoints` must point to `n_breakpoints` readable doubles, `values`
/// to `n_values` readable doubles, and `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_from_segments(
    breakpoints: *const f64,
    n_breakpoints: usize,
    values: *const f64,
    n_values: usize,
    out: *mut *mut BnBelief,
) -> BnStatus {
    if breakpoints.is_null() || values.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    let bps = std::slice::from_raw_parts(breakpoints, n_breakpoints).to_vec();
    let vals = std::slice::from_raw_parts(values, n_values).to_vec();
    match Belief::new(bps, vals) {
        Ok(b) => {
            *out = boxed(b);
            BnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            belief_status(&e)
        }
    }
}

/// # Safety
/// `belief` must be a live handle from this library and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_clone(
    belief: *const BnBelief,
    out: *mut *mut BnBelief,
) -> BnStatus {
    if belief.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    *out = boxed((*belief).inner.clone());
    BnStatus::Ok
}

/// Releases a handle returned by this library. Null is ignored.
///
/// # Safety
/// `belief` must be a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_free(belief: *mut BnBelief) {
    if !belief.is_null() {
        drop(Box::from_raw(belief));
    }
}

/// Number of constant-density segments.
///
/// # Safety
/// `belief` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_segment_count(
    belief: *const BnBelief,
    out: *mut usize,
) -> BnStatus {
    if belief.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    *out = (*belief).inner.segment_count();
    BnStatus::Ok
}

macro_rules! scalar_query {
    ($belief:expr, $out:expr, $call:expr) => {{
        if $belief.is_null() || $out.is_null() {
            set_error("null pointer argument");
            return BnStatus::NullPointer;
        }
        match $call {
            Ok(v) => {
                *$out = v;
                BnStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                belief_status(&e)
            }
        }
    }};
}

/// Cumulative mass of `[0, x]`.
///
/// # Safety
/// `belief` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_cdf(
    belief: *const BnBelief,
    x: f64,
    out: *mut f64,
) -> BnStatus {
    scalar_query!(belief, out, (*belief).inner.cdf(x))
}

/// Leftmost position carrying cumulative mass `u`.
///
/// # Safety
/// `belief` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_quantile(
    belief: *const BnBelief,
    u: f64,
    out: *mut f64,
) -> BnStatus {
    scalar_query!(belief, out, (*belief).inner.quantile(u))
}

/// First moment of the density.
///
/// # Safety
/// `belief` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_mean(belief: *const BnBelief, out: *mut f64) -> BnStatus {
    if belief.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    *out = (*belief).inner.mean();
    BnStatus::Ok
}

/// Density at `x` (right-continuous at breakpoints).
///
/// # Safety
/// `belief` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_density_at(
    belief: *const BnBelief,
    x: f64,
    out: *mut f64,
) -> BnStatus {
    scalar_query!(belief, out, (*belief).inner.density_at(x))
}

/// Bisection Bayes update for binary response `y` (0 or 1) observed through
/// a symmetric channel with crossover `eps`; `x_hat` must be the median of
/// the belief. Writes a new handle to `out`.
///
/// # Safety
/// `belief` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_bayes_update(
    belief: *const BnBelief,
    y: i32,
    eps: f64,
    x_hat: f64,
    out: *mut *mut BnBelief,
) -> BnStatus {
    if belief.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    match (*belief).inner.bayes_bisection_update(y != 0, eps, x_hat) {
        Ok(b) => {
            *out = boxed(b);
            BnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            belief_status(&e)
        }
    }
}

/// Pointwise convex combination `alpha * updated + (1 - alpha) * other`.
///
/// # Safety
/// Both handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bn_belief_mix(
    alpha: f64,
    updated: *const BnBelief,
    other: *const BnBelief,
    out: *mut *mut BnBelief,
) -> BnStatus {
    if updated.is_null() || other.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    match Belief::mix(alpha, &(*updated).inner, &(*other).inner) {
        Ok(b) => {
            *out = boxed(b);
            BnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            belief_status(&e)
        }
    }
}

/// Capacity in bits of a binary symmetric channel, `eps` in `[0, 0.5]`.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn bn_bsc_capacity(eps: f64, out: *mut f64) -> BnStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    match channel::capacity(eps) {
        Ok(v) => {
            *out = v;
            BnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            BnStatus::InvalidArgument
        }
    }
}

/// Response likelihood `f_1(y)` below the query point, `f_0(y)` above it.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn bn_bsc_likelihood(
    y: i32,
    x: f64,
    x_hat: f64,
    eps: f64,
    out: *mut f64,
) -> BnStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    match channel::likelihood(y != 0, x, x_hat, eps) {
        Ok(v) => {
            *out = v;
            BnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            BnStatus::InvalidArgument
        }
    }
}

/// Coefficient of ergodicity of a row-major `m x m` row-stochastic matrix:
/// half the maximum L1 distance between rows.
///
/// # Safety
/// `entries` must point to `m * m` readable doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn bn_tau1(entries: *const f64, m: usize, out: *mut f64) -> BnStatus {
    if entries.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    let flat = std::slice::from_raw_parts(entries, m * m).to_vec();
    match StochasticMatrix::from_flat(m, flat) {
        Ok(a) => {
            *out = bisectnet::network::coefficient_of_ergodicity(&a);
            BnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            BnStatus::InvalidArgument
        }
    }
}

/// Parses a configuration document and runs the configured experiments,
/// writing CSV files into the configured output directory.
///
/// # Safety
/// `config_text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bn_run_experiment(config_text: *const c_char) -> BnStatus {
    if config_text.is_null() {
        set_error("null pointer argument");
        return BnStatus::NullPointer;
    }
    let text = match std::ffi::CStr::from_ptr(config_text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("configuration text is not valid UTF-8");
            return BnStatus::InvalidUtf8;
        }
    };
    let cfg = match ExperimentConfig::parse(text) {
        Ok(cfg) => cfg,
        Err(e) => {
            set_error(&e.to_string());
            return BnStatus::InvalidConfig;
        }
    };
    match experiment::run_experiment(&cfg) {
        Ok(_) => BnStatus::Ok,
        Err(e) => {
            set_error(&e.to_string());
            BnStatus::RunFailed
        }
    }
}
