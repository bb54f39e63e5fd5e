//! C ABI for the filter-ergodics library.
//!
//! Conventions:
//! * Handles (`FeModel`, `FeFilter`) are opaque; create them through the
//!   constructors here and release them with the matching `_free` function.
//!   Freeing a model does not invalidate filters created from it.
//! * Every fallible call returns an [`FeStatus`]; on anything other than
//!   `FE_STATUS_OK` a human-readable message is available through
//!   [`fe_last_error`] on the same thread.
//! * Probability buffers are caller-allocated `double` arrays whose length
//!   is passed explicitly and checked.
//! * All functions taking pointers are `unsafe`: the caller guarantees that
//!   handle pointers come from this library and are not used after free,
//!   that string pointers are NUL-terminated, and that buffer pointers
//!   really have the stated capacity. Null handles and null buffers are
//!   tolerated and reported as `FE_STATUS_NULL_ARGUMENT`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

use filter_ergodics::error::Error;
use filter_ergodics::filter::{
    conditional_given_observation, filter_update_with_norm, FilterState,
};
use filter_ergodics::io::model_from_json;
use filter_ergodics::model::{
    detect_nondegeneracy, stationary_law, JointKernel, StationaryLaw, StationaryOptions,
};
use filter_ergodics::zoo;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    UnknownLabel = 5,
    ImpossibleObservation = 6,
    BufferSize = 7,
    IndexOutOfRange = 8,
    RuntimeError = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(err: &Error) -> FeStatus {
    match err {
        Error::Json(_) | Error::ModelFile(_) => FeStatus::ParseError,
        Error::EmptySpace
        | Error::DuplicateLabel { .. }
        | Error::SpaceTooLarge { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonStochasticRow { .. }
        | Error::NegativeEntry { .. }
        | Error::NonNormalized { .. }
        | Error::NotStationary { .. }
        | Error::EpsilonOutOfRange { .. } => FeStatus::ValidationError,
        Error::UnknownLabel { .. } => FeStatus::UnknownLabel,
        Error::ImpossibleObservation { .. } | Error::UndefinedConditional { .. } => {
            FeStatus::ImpossibleObservation
        }
        _ => FeStatus::RuntimeError,
    }
}

fn fail(err: &Error) -> FeStatus {
    set_error(&err.to_string());
    status_of(err)
}

struct ModelInner {
    kernel: JointKernel,
    law: StationaryLaw,
}

/// Opaque model handle: a validated kernel with its invariant law.
pub struct FeModel {
    inner: Arc<ModelInner>,
}

/// Opaque filter handle: the current conditional law of the hidden state,
/// the observation it was last conditioned on, and the cumulative log
/// likelihood of the observation record so far.
pub struct FeFilter {
    model: Arc<ModelInner>,
    state: FilterState,
    last_observation: usize,
    log_likelihood: f64,
}

/// Version string of the underlying library; static storage, do not free.
#[no_mangle]
pub extern "C" fn fe_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Copy the last error message for this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes). Returns the full message length in bytes,
/// excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fe_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, FeStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(FeStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FeStatus::InvalidUtf8
    })
}

fn build_model(kernel: JointKernel, supplied_pi: Option<Vec<f64>>) -> Result<FeModel, FeStatus> {
    let law = match supplied_pi {
        Some(pi) => StationaryLaw::validate(&kernel, pi).map_err(|e| fail(&e))?,
        None => stationary_law(&kernel, &StationaryOptions::default()).map_err(|e| fail(&e))?,
    };
    Ok(FeModel {
        inner: Arc::new(ModelInner { kernel, law }),
    })
}

/// Parse a model from its JSON description and compute (or validate) its
/// invariant law. On success `*out` owns the new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_model_from_json(
    json: *const c_char,
    out: *mut *mut FeModel,
) -> FeStatus {
    if out.is_null() {
        set_error("null output handle");
        return FeStatus::NullArgument;
    }
    let text = match read_str(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let loaded = match model_from_json(text) {
        Ok(l) => l,
        Err(e) => return fail(&e),
    };
    match build_model(loaded.kernel, loaded.supplied_pi) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(model));
            FeStatus::Ok
        }
        Err(s) => s,
    }
}

/// Construct one of the built-in models by zoo name
/// (e.g. `"example-1.1"`, `"example-1.1-noisy:0.1"`,
/// `"random-nondegenerate:3x2:7"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_model_from_zoo(
    name: *const c_char,
    out: *mut *mut FeModel,
) -> FeStatus {
    if out.is_null() {
        set_error("null output handle");
        return FeStatus::NullArgument;
    }
    let name = match read_str(name) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let spec = match zoo::by_name(name) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let model = FeModel {
        inner: Arc::new(ModelInner {
            kernel: spec.kernel,
            law: spec.stationary,
        }),
    };
    *out = Box::into_raw(Box::new(model));
    FeStatus::Ok
}

/// Release a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fe_model_free(model: *mut FeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of hidden states; zero for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fe_model_hidden_count(model: *const FeModel) -> usize {
    match model.as_ref() {
        Some(m) => m.inner.kernel.space().hidden_count(),
        None => 0,
    }
}

/// Number of observed states; zero for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fe_model_observed_count(model: *const FeModel) -> usize {
    match model.as_ref() {
        Some(m) => m.inner.kernel.space().observed_count(),
        None => 0,
    }
}

/// Index of a hidden-state label.
///
/// # Safety
/// `model` must be null or live, `label` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fe_model_hidden_index(
    model: *const FeModel,
    label: *const c_char,
    out: *mut usize,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return FeStatus::NullArgument;
    }
    let label = match read_str(label) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match m.inner.kernel.space().hidden_index(label) {
        Ok(idx) => {
            *out = idx;
            FeStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Index of an observed-state label.
///
/// # Safety
/// `model` must be null or live, `label` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fe_model_observed_index(
    model: *const FeModel,
    label: *const c_char,
    out: *mut usize,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return FeStatus::NullArgument;
    }
    let label = match read_str(label) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match m.inner.kernel.space().observed_index(label) {
        Ok(idx) => {
            *out = idx;
            FeStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Copy the invariant law over pair states (`z * observed_count + w`) into
/// `buf`, which must hold exactly `hidden_count * observed_count` doubles.
///
/// # Safety
/// `model` must be null or live; `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fe_model_stationary(
    model: *const FeModel,
    buf: *mut f64,
    len: usize,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    let pi = m.inner.law.pi();
    if buf.is_null() {
        set_error("null buffer");
        return FeStatus::NullArgument;
    }
    if len != pi.len() {
        set_error("stationary buffer has the wrong length");
        return FeStatus::BufferSize;
    }
    std::ptr::copy_nonoverlapping(pi.as_ptr(), buf, pi.len());
    FeStatus::Ok
}

/// Whether the kernel factorizes over a strictly positive density
/// (1 = factorization exists, 0 = refuted).
///
/// # Safety
/// `model` must be null or live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_model_is_nondegenerate(
    model: *const FeModel,
    out: *mut i32,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return FeStatus::NullArgument;
    }
    *out = i32::from(detect_nondegeneracy(&m.inner.kernel).is_factorized());
    FeStatus::Ok
}

/// Whether the eigenvalue-1 eigenspace of the kernel is one-dimensional.
///
/// # Safety
/// `model` must be null or live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_model_has_unique_invariant_law(
    model: *const FeModel,
    out: *mut i32,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return FeStatus::NullArgument;
    }
    *out = i32::from(m.inner.law.is_unique());
    FeStatus::Ok
}

fn make_filter(
    model: &FeModel,
    state: Result<FilterState, Error>,
    y0: usize,
    out: *mut *mut FeFilter,
) -> FeStatus {
    match state {
        Ok(state) => {
            let filter = FeFilter {
                model: model.inner.clone(),
                state,
                last_observation: y0,
                log_likelihood: 0.0,
            };
            unsafe { *out = Box::into_raw(Box::new(filter)) };
            FeStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

fn check_observation(model: &FeModel, y: usize) -> Result<(), FeStatus> {
    if y >= model.inner.kernel.space().observed_count() {
        set_error("observation index out of range");
        return Err(FeStatus::IndexOutOfRange);
    }
    Ok(())
}

/// Start a filter from the invariant law conditioned on the first
/// observation `y0`.
///
/// # Safety
/// `model` must be null or live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_init_stationary(
    model: *const FeModel,
    y0: usize,
    out: *mut *mut FeFilter,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output handle");
        return FeStatus::NullArgument;
    }
    if let Err(s) = check_observation(m, y0) {
        return s;
    }
    let state = conditional_given_observation(&m.inner.kernel, m.inner.law.pi(), y0);
    make_filter(m, state, y0, out)
}

/// Start a filter from the uniform law on the hidden space.
///
/// # Safety
/// `model` must be null or live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_init_uniform(
    model: *const FeModel,
    y0: usize,
    out: *mut *mut FeFilter,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output handle");
        return FeStatus::NullArgument;
    }
    if let Err(s) = check_observation(m, y0) {
        return s;
    }
    let ne = m.inner.kernel.space().hidden_count();
    make_filter(m, Ok(FilterState::uniform(ne)), y0, out)
}

/// Start a filter from a point mass at hidden state `z`.
///
/// # Safety
/// `model` must be null or live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_init_point(
    model: *const FeModel,
    z: usize,
    y0: usize,
    out: *mut *mut FeFilter,
) -> FeStatus {
    let Some(m) = model.as_ref() else {
        set_error("null model handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output handle");
        return FeStatus::NullArgument;
    }
    let ne = m.inner.kernel.space().hidden_count();
    if z >= ne {
        set_error("hidden index out of range");
        return FeStatus::IndexOutOfRange;
    }
    if let Err(s) = check_observation(m, y0) {
        return s;
    }
    make_filter(m, Ok(FilterState::point_mass(ne, z)), y0, out)
}

/// Condition the filter on the next observation `y1`. On
/// `FE_STATUS_IMPOSSIBLE_OBSERVATION` the filter state is left unchanged.
///
/// # Safety
/// `filter` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_step(filter: *mut FeFilter, y1: usize) -> FeStatus {
    let Some(f) = filter.as_mut() else {
        set_error("null filter handle");
        return FeStatus::NullArgument;
    };
    if y1 >= f.model.kernel.space().observed_count() {
        set_error("observation index out of range");
        return FeStatus::IndexOutOfRange;
    }
    match filter_update_with_norm(&f.model.kernel, &f.state, f.last_observation, y1) {
        Ok((state, norm)) => {
            f.state = state;
            f.last_observation = y1;
            f.log_likelihood += norm.ln();
            FeStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Copy the current hidden-state probabilities into `buf` of length
/// `hidden_count`.
///
/// # Safety
/// `filter` must be null or live; `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_probs(
    filter: *const FeFilter,
    buf: *mut f64,
    len: usize,
) -> FeStatus {
    let Some(f) = filter.as_ref() else {
        set_error("null filter handle");
        return FeStatus::NullArgument;
    };
    if buf.is_null() {
        set_error("null buffer");
        return FeStatus::NullArgument;
    }
    let probs = f.state.probs();
    if len != probs.len() {
        set_error("probability buffer has the wrong length");
        return FeStatus::BufferSize;
    }
    std::ptr::copy_nonoverlapping(probs.as_ptr(), buf, probs.len());
    FeStatus::Ok
}

/// Cumulative log likelihood of the observation moves applied so far
/// (zero right after initialization).
///
/// # Safety
/// `filter` must be null or live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_log_likelihood(
    filter: *const FeFilter,
    out: *mut f64,
) -> FeStatus {
    let Some(f) = filter.as_ref() else {
        set_error("null filter handle");
        return FeStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return FeStatus::NullArgument;
    }
    *out = f.log_likelihood;
    FeStatus::Ok
}

/// Release a filter handle. Null is a no-op.
///
/// # Safety
/// `filter` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fe_filter_free(filter: *mut FeFilter) {
    if !filter.is_null() {
        drop(Box::from_raw(filter));
    }
}
