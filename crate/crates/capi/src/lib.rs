//! C ABI for the casetwin toolkit.
//!
//! Conventions:
//! - Opaque handles (`CtCaseBase`, `CtModel`) are created and freed by this
//!   library; never free them with anything but the matching `*_free`.
//! - Every fallible call returns a [`CtStatus`]; outputs go through out
//!   pointers that are written only on `CT_STATUS_OK`.
//! - Explanation results come back as JSON strings (the same payload schema
//!   the CLI reports use); release them with [`ct_string_free`].
//! - [`ct_last_error_message`] returns a thread-local description of the most
//!   recent failure, valid until the next failing call on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use casetwin::cf_tabular::{generate_cf, mine_explanation_cases, CfOptions};
use casetwin::data::casebase::CaseBase;
use casetwin::data::io::load_tabular_csv;
use casetwin::factual::explain_factual;
use casetwin::metrics::evaluate_explanation;
use casetwin::mlp::{load_model, save_model, train_classifier, MlpModel, TrainConfig};
use casetwin::retrieval::{twin_fidelity, Space};
use casetwin::semifactual::{fit_hurdle, generate_sf_cf};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// An argument was out of range or otherwise unusable.
    InvalidArgument = 3,
    /// A data, model, or generation error; see `ct_last_error_message`.
    DataError = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Opaque case base handle.
pub struct CtCaseBase {
    inner: CaseBase,
}

/// Opaque model handle.
pub struct CtModel {
    inner: MlpModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(msg).unwrap_or_default();
    });
}

/// Message describing the most recent failure on this thread. The pointer is
/// owned by the library and valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn ct_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, CtStatus> {
    if ptr.is_null() {
        set_error(format!("argument '{name}' is null"));
        return Err(CtStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("argument '{name}' is not valid UTF-8"));
        CtStatus::Utf8
    })
}

unsafe fn handle_arg<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, CtStatus> {
    if ptr.is_null() {
        set_error(format!("argument '{name}' is null"));
        return Err(CtStatus::NullPointer);
    }
    Ok(&*ptr)
}

fn data_error(e: impl std::fmt::Display) -> CtStatus {
    set_error(e.to_string());
    CtStatus::DataError
}

fn guard(body: impl FnOnce() -> CtStatus + std::panic::UnwindSafe) -> CtStatus {
    match catch_unwind(body) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CtStatus::Panic
        }
    }
}

fn write_out<T>(out: *mut T, value: T, name: &str) -> CtStatus {
    if out.is_null() {
        set_error(format!("out pointer '{name}' is null"));
        return CtStatus::NullPointer;
    }
    unsafe { out.write(value) };
    CtStatus::Ok
}

fn json_out(value: serde_json::Value, out: *mut *mut c_char) -> CtStatus {
    let text = match serde_json::to_string_pretty(&value) {
        Ok(t) => t,
        Err(e) => return data_error(e),
    };
    let cstring = match CString::new(text) {
        Ok(c) => c,
        Err(e) => return data_error(e),
    };
    write_out(out, cstring.into_raw(), "json_out")
}

/// Load a tabular CSV (header row, label column by name) into a case base.
///
/// # Safety
/// `path` and `label` must be valid NUL-terminated strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_casebase_load_csv(
    path: *const c_char,
    label: *const c_char,
    out: *mut *mut CtCaseBase,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let path = match utf8_arg(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let label = match utf8_arg(label, "label") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_tabular_csv(&path, label, None) {
            Ok(cb) => write_out(out, Box::into_raw(Box::new(CtCaseBase { inner: cb })), "out"),
            Err(e) => data_error(e),
        }
    }))
}

/// Number of cases in the case base.
///
/// # Safety
/// `cb` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ct_casebase_len(cb: *const CtCaseBase, out: *mut usize) -> CtStatus {
    guard(AssertUnwindSafe(|| match handle_arg(cb, "cb") {
        Ok(cb) => write_out(out, cb.inner.len(), "out"),
        Err(status) => status,
    }))
}

/// Free a case base handle. Null is a no-op.
///
/// # Safety
/// `cb` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ct_casebase_free(cb: *mut CtCaseBase) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// Train a softmax classifier on the case base. `hidden` is a comma-separated
/// list of hidden layer widths (e.g. "16" or "16,8"); empty means no hidden
/// layer.
///
/// # Safety
/// `cb` must be a live handle; `hidden` a valid string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_model_train(
    cb: *const CtCaseBase,
    hidden: *const c_char,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
    out: *mut *mut CtModel,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let cb = match handle_arg(cb, "cb") {
            Ok(cb) => cb,
            Err(status) => return status,
        };
        let hidden = match utf8_arg(hidden, "hidden") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut widths = Vec::new();
        for part in hidden.split(',').filter(|p| !p.trim().is_empty()) {
            match part.trim().parse::<usize>() {
                Ok(w) => widths.push(w),
                Err(_) => {
                    set_error(format!("invalid hidden width '{part}'"));
                    return CtStatus::InvalidArgument;
                }
            }
        }
        let cfg = TrainConfig {
            epochs,
            learning_rate,
            seed,
            ..TrainConfig::default()
        };
        match train_classifier(&cb.inner, &widths, &cfg) {
            Ok((model, _)) => {
                write_out(out, Box::into_raw(Box::new(CtModel { inner: model })), "out")
            }
            Err(e) => data_error(e),
        }
    }))
}

/// Load a model from its JSON file.
///
/// # Safety
/// `path` must be a valid string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_model_load(path: *const c_char, out: *mut *mut CtModel) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let path = match utf8_arg(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        match load_model(&path) {
            Ok(model) => {
                write_out(out, Box::into_raw(Box::new(CtModel { inner: model })), "out")
            }
            Err(e) => data_error(e),
        }
    }))
}

/// Save a model to a JSON file.
///
/// # Safety
/// `model` must be a live handle; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn ct_model_save(model: *const CtModel, path: *const c_char) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let model = match handle_arg(model, "model") {
            Ok(m) => m,
            Err(status) => return status,
        };
        let path = match utf8_arg(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        match save_model(&model.inner, &path) {
            Ok(()) => CtStatus::Ok,
            Err(e) => data_error(e),
        }
    }))
}

/// Free a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ct_model_free(model: *mut CtModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicted class index of one case of the case base.
///
/// # Safety
/// `model` and `cb` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_model_predict(
    model: *const CtModel,
    cb: *const CtCaseBase,
    case_index: usize,
    out: *mut usize,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let (model, cb) = match (handle_arg(model, "model"), handle_arg(cb, "cb")) {
            (Ok(m), Ok(c)) => (m, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some(case) = cb.inner.cases().get(case_index) else {
            set_error(format!("case index {case_index} out of range"));
            return CtStatus::InvalidArgument;
        };
        match model.inner.predict_case(case) {
            Ok(class) => write_out(out, class, "out"),
            Err(e) => data_error(e),
        }
    }))
}

/// Factual explanation of one query case as a JSON document.
///
/// # Safety
/// Handles must be live; `json_out` must be a valid pointer. The returned
/// string must be released with `ct_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ct_explain_factual(
    model: *const CtModel,
    cb: *const CtCaseBase,
    query_index: usize,
    k: usize,
    json_out_ptr: *mut *mut c_char,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let (model, cb) = match (handle_arg(model, "model"), handle_arg(cb, "cb")) {
            (Ok(m), Ok(c)) => (m, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some(query) = cb.inner.cases().get(query_index) else {
            set_error(format!("query index {query_index} out of range"));
            return CtStatus::InvalidArgument;
        };
        match explain_factual(&model.inner, &cb.inner, query, k, Some(query.id)) {
            Ok(neighbors) => {
                let rows: Vec<serde_json::Value> = neighbors
                    .iter()
                    .map(|n| {
                        let case = cb.inner.case(n.case_id).expect("neighbor id");
                        serde_json::json!({
                            "case_id": n.case_id,
                            "distance": n.distance,
                            "values": case.features,
                            "contributions": n.contributions,
                            "attribution": n.attribution,
                        })
                    })
                    .collect();
                json_out(
                    serde_json::json!({
                        "query_index": query_index,
                        "query": query.features,
                        "neighbors": rows,
                        "k": k,
                    }),
                    json_out_ptr,
                )
            }
            Err(e) => data_error(e),
        }
    }))
}

/// Case-based counterfactual for one query case as a JSON document with
/// quality metrics.
///
/// # Safety
/// Handles must be live; `json_out` must be a valid pointer. The returned
/// string must be released with `ct_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ct_explain_counterfactual(
    model: *const CtModel,
    cb: *const CtCaseBase,
    query_index: usize,
    tau: f64,
    json_out_ptr: *mut *mut c_char,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let (model, cb) = match (handle_arg(model, "model"), handle_arg(cb, "cb")) {
            (Ok(m), Ok(c)) => (m, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some(query) = cb.inner.cases().get(query_index) else {
            set_error(format!("query index {query_index} out of range"));
            return CtStatus::InvalidArgument;
        };
        let xcs = mine_explanation_cases(&cb.inner, tau, 2);
        let opts = CfOptions { tau, ..CfOptions::default() };
        let cf = match generate_cf(query, &model.inner, &cb.inner, &xcs, &opts) {
            Ok(cf) => cf,
            Err(e) => return data_error(e),
        };
        let metrics =
            match evaluate_explanation(query, &cf.instance, &model.inner, &cb.inner, &xcs, tau) {
                Ok(m) => m,
                Err(e) => return data_error(e),
            };
        json_out(
            serde_json::json!({
                "query_index": query_index,
                "counterfactual": cf,
                "metrics": metrics,
            }),
            json_out_ptr,
        )
    }))
}

/// Semi-factual and counterfactual from exceptional latent features, as a
/// JSON document.
///
/// # Safety
/// Handles must be live; `json_out` must be a valid pointer. The returned
/// string must be released with `ct_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ct_explain_semifactual(
    model: *const CtModel,
    cb: *const CtCaseBase,
    query_index: usize,
    target_class: usize,
    alpha: f64,
    json_out_ptr: *mut *mut c_char,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let (model, cb) = match (handle_arg(model, "model"), handle_arg(cb, "cb")) {
            (Ok(m), Ok(c)) => (m, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some(query) = cb.inner.cases().get(query_index) else {
            set_error(format!("query index {query_index} out of range"));
            return CtStatus::InvalidArgument;
        };
        let stats = match fit_hurdle(&model.inner, &cb.inner) {
            Ok(s) => s,
            Err(e) => return data_error(e),
        };
        match generate_sf_cf(&model.inner, &stats, &cb.inner, query, target_class, alpha) {
            Ok(result) => json_out(
                serde_json::json!({
                    "query_index": query_index,
                    "target_class": target_class,
                    "result": result,
                }),
                json_out_ptr,
            ),
            Err(e) => data_error(e),
        }
    }))
}

/// Contribution-space twin fidelity of the case base against the model,
/// evaluated over the training cases.
///
/// # Safety
/// Handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_eval_fidelity(
    model: *const CtModel,
    cb: *const CtCaseBase,
    k: usize,
    out: *mut f64,
) -> CtStatus {
    guard(AssertUnwindSafe(|| {
        let (model, cb) = match (handle_arg(model, "model"), handle_arg(cb, "cb")) {
            (Ok(m), Ok(c)) => (m, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match twin_fidelity(&model.inner, &cb.inner, cb.inner.cases(), k, Space::Contribution) {
            Ok(f) => write_out(out, f, "out"),
            Err(e) => data_error(e),
        }
    }))
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have been returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ct_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
