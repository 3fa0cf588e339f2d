//! Exercises the C ABI exactly as an external caller would: through the
//! extern "C" functions, CStrings, and raw out pointers.

use std::ffi::{CStr, CString};
use std::io::Write;
use std::ptr;

use casetwin_capi::*;

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn write_blobs_csv() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x,y,class").unwrap();
    // Two well-separated clusters of five points each.
    for i in 0..5 {
        writeln!(f, "{},{},a", i as f64 * 0.1, i as f64 * 0.1).unwrap();
        writeln!(f, "{},{},b", 3.0 + i as f64 * 0.1, 3.0 + i as f64 * 0.1).unwrap();
    }
    f
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ct_last_error_message()).to_string_lossy().into_owned() }
}

#[test]
fn full_pipeline_through_the_c_abi() {
    let csv = write_blobs_csv();
    let path = cstring(csv.path().to_str().unwrap());
    let label = cstring("class");

    unsafe {
        let mut cb: *mut CtCaseBase = ptr::null_mut();
        assert_eq!(ct_casebase_load_csv(path.as_ptr(), label.as_ptr(), &mut cb), CtStatus::Ok);
        let mut len = 0usize;
        assert_eq!(ct_casebase_len(cb, &mut len), CtStatus::Ok);
        assert_eq!(len, 10);

        let hidden = cstring("8");
        let mut model: *mut CtModel = ptr::null_mut();
        assert_eq!(
            ct_model_train(cb, hidden.as_ptr(), 200, 0.1, 7, &mut model),
            CtStatus::Ok,
            "{}",
            last_error()
        );

        let mut class = usize::MAX;
        assert_eq!(ct_model_predict(model, cb, 0, &mut class), CtStatus::Ok);
        assert!(class < 2);

        // Save, reload, and check the reloaded model predicts identically.
        let model_file = tempfile::NamedTempFile::new().unwrap();
        let model_path = cstring(model_file.path().to_str().unwrap());
        assert_eq!(ct_model_save(model, model_path.as_ptr()), CtStatus::Ok);
        let mut reloaded: *mut CtModel = ptr::null_mut();
        assert_eq!(ct_model_load(model_path.as_ptr(), &mut reloaded), CtStatus::Ok);
        for i in 0..len {
            let (mut a, mut b) = (0usize, 0usize);
            assert_eq!(ct_model_predict(model, cb, i, &mut a), CtStatus::Ok);
            assert_eq!(ct_model_predict(reloaded, cb, i, &mut b), CtStatus::Ok);
            assert_eq!(a, b);
        }

        // Factual explanation returns parseable JSON.
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            ct_explain_factual(model, cb, 0, 3, &mut json),
            CtStatus::Ok,
            "{}",
            last_error()
        );
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ct_string_free(json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(parsed["neighbors"].is_array());

        // Counterfactual explanation with metrics.
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            ct_explain_counterfactual(model, cb, 0, 0.1, &mut json),
            CtStatus::Ok,
            "{}",
            last_error()
        );
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ct_string_free(json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(parsed["counterfactual"]["valid"].is_boolean());
        assert!(parsed["metrics"]["proximity"].as_f64().unwrap() >= 0.0);

        // Semi-factual generation toward the other class.
        let mut q_class = 0usize;
        assert_eq!(ct_model_predict(model, cb, 0, &mut q_class), CtStatus::Ok);
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        let status = ct_explain_semifactual(model, cb, 0, 1 - q_class, 0.05, &mut json);
        assert_eq!(status, CtStatus::Ok, "{}", last_error());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ct_string_free(json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(parsed["result"]["semifactual"]["realized_case"].is_u64());

        // Fidelity lands in the unit interval.
        let mut fidelity = -1.0f64;
        assert_eq!(ct_eval_fidelity(model, cb, 3, &mut fidelity), CtStatus::Ok);
        assert!((0.0..=1.0).contains(&fidelity));

        ct_model_free(reloaded);
        ct_model_free(model);
        ct_casebase_free(cb);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    unsafe {
        // Null pointers.
        let mut cb: *mut CtCaseBase = ptr::null_mut();
        let label = cstring("y");
        assert_eq!(
            ct_casebase_load_csv(ptr::null(), label.as_ptr(), &mut cb),
            CtStatus::NullPointer
        );
        assert!(!last_error().is_empty());

        // Missing file is a data error with a message.
        let path = cstring("/definitely/not/here.csv");
        assert_eq!(
            ct_casebase_load_csv(path.as_ptr(), label.as_ptr(), &mut cb),
            CtStatus::DataError
        );
        assert!(last_error().contains("No such file") || !last_error().is_empty());

        // Out-of-range index is an invalid argument.
        let csv = write_blobs_csv();
        let path = cstring(csv.path().to_str().unwrap());
        let label = cstring("class");
        assert_eq!(
            ct_casebase_load_csv(path.as_ptr(), label.as_ptr(), &mut cb),
            CtStatus::Ok
        );
        let hidden = cstring("4");
        let mut model: *mut CtModel = ptr::null_mut();
        assert_eq!(
            ct_model_train(cb, hidden.as_ptr(), 10, 0.1, 0, &mut model),
            CtStatus::Ok
        );
        let mut class = 0usize;
        assert_eq!(
            ct_model_predict(model, cb, 10_000, &mut class),
            CtStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));

        // Bad hidden spec.
        let bad_hidden = cstring("16,zap");
        let mut m2: *mut CtModel = ptr::null_mut();
        assert_eq!(
            ct_model_train(cb, bad_hidden.as_ptr(), 10, 0.1, 0, &mut m2),
            CtStatus::InvalidArgument
        );

        ct_model_free(model);
        ct_casebase_free(cb);

        // Freeing nulls is a no-op.
        ct_model_free(ptr::null_mut());
        ct_casebase_free(ptr::null_mut());
        ct_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_exists_with_expected_symbols() {
    // build.rs writes the header next to the build artifacts
    // (target/<profile>/include); locate it relative to this test binary.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe
        .parent() // deps/
        .and_then(|p| p.parent()) // <profile>/
        .expect("test binary lives under target/<profile>/deps");
    let header_path = profile_dir.join("include/casetwin.h");
    let header = std::fs::read_to_string(&header_path)
        .unwrap_or_else(|e| panic!("expected generated header at {header_path:?}: {e}"));
    for symbol in [
        "CtStatus",
        "CtCaseBase",
        "CtModel",
        "ct_casebase_load_csv",
        "ct_model_train",
        "ct_explain_factual",
        "ct_explain_counterfactual",
        "ct_explain_semifactual",
        "ct_eval_fidelity",
        "ct_string_free",
        "ct_last_error_message",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
