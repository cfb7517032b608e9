//! C ABI for the spectral deviation-bound library.
//!
//! The surface is a handle-based wrapper: parse a model description into
//! an opaque handle, query its signal spectrum, and request deviation
//! bounds as JSON documents. Every fallible call returns a status code;
//! the most recent error message is retrievable per thread. Strings
//! returned by the library must be released with `ktb_string_free`.
//!
//! The matching header `include/katobound.h` is generated at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use katobound::concentration::{self, ConcentrationProfile};
use katobound::error::Error;
use katobound::inference::{self, IntervalMethod};
use katobound::kato_temple::{
    deviation_bound, sv_deviation_bound, DeviationBound, LocalSpectrum, NoiseNormEstimate,
};
use katobound::models::ModelSpec;
use katobound::spectral::{SpectralWindow, Spectrum};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KtbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    /// A mathematical precondition failed (inadmissible scale, window
    /// ordering, unreachable target, insufficient separation).
    MathDomain = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

/// Which bound family a norm figure belongs to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KtbNormKind {
    Empirical = 0,
    Analytic = 1,
    PlugIn = 2,
}

/// Confidence-interval construction for the separation threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KtbIntervalMethod {
    KatoTemple = 0,
    WeylLuPeng = 1,
}

/// Opaque model handle.
pub struct KtbModel {
    spec: ModelSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> KtbStatus {
    match err {
        Error::Json(_) => KtbStatus::ParseError,
        _ if err.is_domain_error() => KtbStatus::MathDomain,
        _ => KtbStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> KtbStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn guarded<F: FnOnce() -> KtbStatus>(body: F) -> KtbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            KtbStatus::Internal
        }
    }
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn ktb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Most recent error message on this thread, or NULL if none. The caller
/// owns the returned string and must release it with `ktb_string_free`.
#[no_mangle]
pub extern "C" fn ktb_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(text) => text.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Releases a string allocated by this library.
///
/// # Safety
/// `text` must be NULL or a pointer previously returned by a katobound
/// function, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ktb_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parses a JSON model description into a handle. On success writes the
/// handle to `out` and returns OK; the handle must be released with
/// `ktb_model_free`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_model_parse_json(
    json: *const c_char,
    out: *mut *mut KtbModel,
) -> KtbStatus {
    if json.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(text) => text,
        Err(_) => {
            set_error("model JSON is not valid UTF-8".into());
            return KtbStatus::InvalidUtf8;
        }
    };
    guarded(|| match ModelSpec::from_json(text) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(KtbModel { spec }));
            KtbStatus::Ok
        }
        Err(err) => fail(err),
    })
}

/// Releases a model handle.
///
/// # Safety
/// `model` must be NULL or a handle from `ktb_model_parse_json`, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ktb_model_free(model: *mut KtbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn model_ref<'a>(model: *const KtbModel) -> Option<&'a KtbModel> {
    model.as_ref()
}

/// Vertex count of a graph model, matrix dimension of the spike model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_model_dimension(
    model: *const KtbModel,
    out: *mut usize,
) -> KtbStatus {
    let (Some(handle), false) = (model_ref(model), out.is_null()) else {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    };
    *out = handle.spec.dimension();
    KtbStatus::Ok
}

fn signal_values(spec: &ModelSpec) -> Result<Vec<f64>, Error> {
    match spec {
        ModelSpec::Sbm { .. } | ModelSpec::Er { .. } => {
            Ok(spec.as_block_model()?.signal_eigenvalues())
        }
        ModelSpec::Rdpg { .. } => {
            let p = spec.build_probability_matrix()?;
            let spectrum = katobound::spectral::symmetric_eigenvalues(p.entries())?;
            Ok(spectrum
                .values()
                .iter()
                .copied()
                .filter(|v| v.abs() > 1e-9)
                .collect())
        }
        ModelSpec::Spike { .. } => Ok(spec.as_spike_spec()?.singular_values()),
    }
}

/// Signal values of the model (nonzero eigenvalues of a graph model's
/// expectation, singular values of the spike model), ascending. Writes at
/// most `capacity` values into `buffer` and stores the total count in
/// `written`; call with a NULL buffer (capacity 0) to query the count.
///
/// # Safety
/// `model` must be a live handle, `written` valid, and `buffer` valid for
/// `capacity` writes when non-NULL.
#[no_mangle]
pub unsafe extern "C" fn ktb_model_signal_values(
    model: *const KtbModel,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> KtbStatus {
    let (Some(handle), false) = (model_ref(model), written.is_null()) else {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    };
    guarded(|| match signal_values(&handle.spec) {
        Ok(values) => {
            *written = values.len();
            if !buffer.is_null() {
                for (i, v) in values.iter().take(capacity).enumerate() {
                    *buffer.add(i) = *v;
                }
            }
            KtbStatus::Ok
        }
        Err(err) => fail(err),
    })
}

/// Analytic spectral-norm tail threshold for the model's noise:
/// 3 sqrt(n) for adjacency noise, 6 sqrt(q) for the Gaussian spike model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_analytic_norm_threshold(
    model: *const KtbModel,
    out: *mut f64,
) -> KtbStatus {
    let (Some(handle), false) = (model_ref(model), out.is_null()) else {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    };
    guarded(|| {
        let dim = handle.spec.dimension();
        let tail = if matches!(handle.spec, ModelSpec::Spike { .. }) {
            concentration::spectral_norm_tail(&ConcentrationProfile::gaussian(), dim, dim, 4.0, false)
        } else {
            concentration::spectral_norm_tail(
                &ConcentrationProfile::bernoulli_adjacency(),
                dim,
                dim,
                1.0,
                true,
            )
        };
        match tail {
            Ok(tail) => {
                *out = tail.threshold;
                KtbStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

fn bounds_for(
    spec: &ModelSpec,
    alpha: f64,
    beta: f64,
    t: f64,
    noise: NoiseNormEstimate,
) -> Result<Vec<DeviationBound>, Error> {
    let window = SpectralWindow::new(alpha, beta)?;
    let spectrum = match spec {
        ModelSpec::Sbm { .. } | ModelSpec::Er { .. } => {
            let model = spec.as_block_model()?;
            let signal = model.signal_eigenvalues();
            let zeros = model.n() - signal.len();
            Spectrum::eigenvalues(
                signal
                    .into_iter()
                    .chain(std::iter::repeat_n(0.0, zeros))
                    .collect(),
            )
        }
        ModelSpec::Rdpg { .. } => {
            let p = spec.build_probability_matrix()?;
            katobound::spectral::symmetric_eigenvalues(p.entries())?
        }
        ModelSpec::Spike { .. } => Spectrum::singular_values(spec.as_spike_spec()?.singular_values()),
    };
    let local = LocalSpectrum::from_spectrum(&spectrum, window)?;
    (1..=local.d())
        .map(|k| {
            if matches!(spec, ModelSpec::Spike { .. }) {
                sv_deviation_bound(k, &local, t, &noise, &ConcentrationProfile::gaussian())
            } else {
                deviation_bound(k, &local, t, &noise)
            }
        })
        .collect()
}

/// Deviation bounds for every signal value of the model inside the window
/// (alpha, beta), serialized as a JSON array. Pass INFINITY as `beta` for
/// a window unbounded above. The noise norm is supplied explicitly as a
/// (kind, value) pair; `ktb_analytic_norm_threshold` provides the usual
/// analytic value. The returned string must be released with
/// `ktb_string_free`.
///
/// # Safety
/// `model` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_model_bounds_json(
    model: *const KtbModel,
    alpha: f64,
    beta: f64,
    t: f64,
    norm_kind: KtbNormKind,
    norm_value: f64,
    out_json: *mut *mut c_char,
) -> KtbStatus {
    let (Some(handle), false) = (model_ref(model), out_json.is_null()) else {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    };
    guarded(|| {
        let noise = match norm_kind {
            KtbNormKind::Empirical => NoiseNormEstimate::empirical(norm_value),
            KtbNormKind::Analytic => NoiseNormEstimate::analytic(norm_value),
            KtbNormKind::PlugIn => NoiseNormEstimate::plug_in(norm_value),
        };
        let noise = match noise {
            Ok(noise) => noise,
            Err(err) => return fail(err),
        };
        match bounds_for(&handle.spec, alpha, beta, t, noise) {
            Ok(bounds) => {
                let json = serde_json::to_string_pretty(&bounds).expect("serializable bounds");
                *out_json = CString::new(json)
                    .expect("JSON has no interior NUL")
                    .into_raw();
                KtbStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Minimal deviation scale t at which the three-signal unconditional
/// probability floor reaches `target_prob` for an n-vertex graph.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_solve_t(
    target_prob: f64,
    d: usize,
    n: usize,
    out: *mut f64,
) -> KtbStatus {
    if out.is_null() {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    }
    guarded(|| match inference::solve_t(target_prob, d, n) {
        Ok(t) => {
            *out = t;
            KtbStatus::Ok
        }
        Err(err) => fail(err),
    })
}

/// Smallest perturbation at which the three-block null and alternative
/// confidence intervals separate (probability 0.99, ceiling 0.2).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_epsilon_n(
    n: usize,
    p: f64,
    q: f64,
    method: KtbIntervalMethod,
    out: *mut f64,
) -> KtbStatus {
    if out.is_null() {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    }
    let method = match method {
        KtbIntervalMethod::KatoTemple => IntervalMethod::KatoTemple,
        KtbIntervalMethod::WeylLuPeng => IntervalMethod::WeylLuPeng,
    };
    guarded(|| match inference::epsilon_n(n, p, q, method) {
        Ok(eps) => {
            *out = eps;
            KtbStatus::Ok
        }
        Err(err) => fail(err),
    })
}

/// Detectability index of a chatter community: below one in the limit, no
/// test statistic is consistent.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ktb_detectability_index(
    n: usize,
    m: usize,
    p: f64,
    eps: f64,
    out: *mut f64,
) -> KtbStatus {
    if out.is_null() {
        set_error("null pointer argument".into());
        return KtbStatus::NullPointer;
    }
    guarded(|| {
        let spec = match inference::ChangePointSpec::new(n, m, p, eps, 1, 1) {
            Ok(spec) => spec,
            Err(err) => return fail(err),
        };
        match inference::detectability_index(&spec) {
            Ok(index) => {
                *out = index;
                KtbStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BLOCK: &str = r#"{"kind":"sbm","B":[[0.6,0.3],[0.3,0.6]],"block_sizes":[500,500]}"#;

    unsafe fn parse(json: &str) -> *mut KtbModel {
        let text = CString::new(json).unwrap();
        let mut handle: *mut KtbModel = ptr::null_mut();
        let status = ktb_model_parse_json(text.as_ptr(), &mut handle);
        assert_eq!(status, KtbStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    unsafe fn take_string(ptr: *mut c_char) -> String {
        assert!(!ptr.is_null());
        let text = CStr::from_ptr(ptr).to_str().unwrap().to_owned();
        ktb_string_free(ptr);
        text
    }

    #[test]
    fn version_is_a_static_string() {
        let version = unsafe { CStr::from_ptr(ktb_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn parse_query_and_free_a_model() {
        unsafe {
            let handle = parse(TWO_BLOCK);
            let mut dim = 0usize;
            assert_eq!(ktb_model_dimension(handle, &mut dim), KtbStatus::Ok);
            assert_eq!(dim, 1000);

            let mut count = 0usize;
            assert_eq!(
                ktb_model_signal_values(handle, ptr::null_mut(), 0, &mut count),
                KtbStatus::Ok
            );
            assert_eq!(count, 2);
            let mut values = vec![0.0f64; count];
            assert_eq!(
                ktb_model_signal_values(handle, values.as_mut_ptr(), values.len(), &mut count),
                KtbStatus::Ok
            );
            assert!((values[0] - 150.0).abs() < 1e-9);
            assert!((values[1] - 450.0).abs() < 1e-9);
            ktb_model_free(handle);
        }
    }

    #[test]
    fn bounds_round_trip_as_json() {
        unsafe {
            let handle = parse(TWO_BLOCK);
            let mut threshold = 0.0f64;
            assert_eq!(
                ktb_analytic_norm_threshold(handle, &mut threshold),
                KtbStatus::Ok
            );
            assert!((threshold - 3.0 * 1000.0f64.sqrt()).abs() < 1e-12);

            let mut json: *mut c_char = ptr::null_mut();
            let status = ktb_model_bounds_json(
                handle,
                42.4,
                f64::INFINITY,
                2.55,
                KtbNormKind::Analytic,
                threshold,
                &mut json,
            );
            assert_eq!(status, KtbStatus::Ok);
            let text = take_string(json);
            let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
            let bounds = parsed.as_array().unwrap();
            assert_eq!(bounds.len(), 2);
            assert_eq!(bounds[0]["noise"]["source"], "analytic");
            ktb_model_free(handle);
        }
    }

    #[test]
    fn spike_models_use_the_singular_value_route() {
        unsafe {
            let handle = parse(r#"{"kind":"spike","m":1,"n":2,"p":1,"kappa":400.0,"tau":400.0}"#);
            let mut json: *mut c_char = ptr::null_mut();
            let status = ktb_model_bounds_json(
                handle,
                150.0,
                650.0,
                2.0,
                KtbNormKind::Analytic,
                12.0,
                &mut json,
            );
            assert_eq!(status, KtbStatus::Ok);
            let text = take_string(json);
            assert!(text.contains("\"d\": 2"));
            ktb_model_free(handle);
        }
    }

    #[test]
    fn errors_set_status_and_message() {
        unsafe {
            let mut handle: *mut KtbModel = ptr::null_mut();
            let bad = CString::new("{\"kind\":\"nope\"}").unwrap();
            let status = ktb_model_parse_json(bad.as_ptr(), &mut handle);
            assert_eq!(status, KtbStatus::ParseError);
            let message = take_string(ktb_last_error_message());
            assert!(!message.is_empty());

            // inadmissible scale surfaces as a domain error
            let model = parse(TWO_BLOCK);
            let mut json: *mut c_char = ptr::null_mut();
            let status = ktb_model_bounds_json(
                model,
                42.4,
                f64::INFINITY,
                1e6,
                KtbNormKind::Analytic,
                94.9,
                &mut json,
            );
            assert_eq!(status, KtbStatus::MathDomain);
            let message = take_string(ktb_last_error_message());
            assert!(message.contains("maximal admissible"), "{message}");
            ktb_model_free(model);

            // null pointers are rejected without crashing
            assert_eq!(
                ktb_model_parse_json(ptr::null(), &mut handle),
                KtbStatus::NullPointer
            );
            assert_eq!(ktb_solve_t(0.99, 3, 6000, ptr::null_mut()), KtbStatus::NullPointer);
        }
    }

    #[test]
    fn scalar_helpers_match_the_library() {
        unsafe {
            let mut t = 0.0f64;
            assert_eq!(ktb_solve_t(0.99, 3, 6000, &mut t), KtbStatus::Ok);
            assert!((t - 2.6627).abs() < 1e-3);

            let mut eps = 0.0f64;
            assert_eq!(
                ktb_epsilon_n(6000, 0.81, 0.2025, KtbIntervalMethod::KatoTemple, &mut eps),
                KtbStatus::Ok
            );
            assert!((eps - 0.0407).abs() < 0.001);

            let mut index = 0.0f64;
            assert_eq!(
                ktb_detectability_index(400, 40, 0.2, 0.2, &mut index),
                KtbStatus::Ok
            );
            assert!((index - 0.909).abs() < 0.01);

            // unreachable targets surface as domain errors
            assert_eq!(ktb_solve_t(0.999999, 3, 20, &mut t), KtbStatus::MathDomain);
        }
    }

    #[test]
    fn header_is_generated_with_the_public_surface() {
        let header = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/katobound.h"),
        )
        .expect("header generated at build time");
        for symbol in [
            "ktb_model_parse_json",
            "ktb_model_bounds_json",
            "ktb_model_free",
            "ktb_string_free",
            "ktb_epsilon_n",
            "KtbStatus",
        ] {
            assert!(header.contains(symbol), "header is missing {symbol}");
        }
    }
}
