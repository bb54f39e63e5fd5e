//! Exercise the C ABI the way a foreign binding would: through raw pointers
//! and status codes only. All calls honor the header's safety contract, so
//! each test body is one unsafe block.

use std::ffi::{c_char, CString};
use std::ptr;

use filter_ergodics_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0i8; 256];
    let len = unsafe { fe_last_error(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    let bytes: Vec<u8> = buf[..len.min(buf.len() - 1)]
        .iter()
        .map(|&b| b as u8)
        .collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

unsafe fn zoo_model(name: &str) -> *mut FeModel {
    let name = CString::new(name).unwrap();
    let mut model: *mut FeModel = ptr::null_mut();
    let status = fe_model_from_zoo(name.as_ptr(), &mut model);
    assert_eq!(status, FeStatus::Ok, "zoo model failed: {}", last_error());
    assert!(!model.is_null());
    model
}

#[test]
fn version_is_a_static_string() {
    let ptr = fe_version();
    assert!(!ptr.is_null());
    let version = unsafe { std::ffi::CStr::from_ptr(ptr) }.to_str().unwrap();
    assert!(version.starts_with(|c: char| c.is_ascii_digit()));
}

#[test]
fn model_from_json_and_filter_walk() {
    let json = r#"{
        "hidden_labels": ["rain", "sun"],
        "observed_labels": ["umbrella", "none"],
        "kernel": {"type": "joint", "rows": [
            [0.40, 0.10, 0.35, 0.15],
            [0.25, 0.25, 0.25, 0.25],
            [0.20, 0.20, 0.30, 0.30],
            [0.10, 0.15, 0.30, 0.45]
        ]}
    }"#;
    unsafe {
        let cjson = CString::new(json).unwrap();
        let mut model: *mut FeModel = ptr::null_mut();
        assert_eq!(fe_model_from_json(cjson.as_ptr(), &mut model), FeStatus::Ok);
        assert_eq!(fe_model_hidden_count(model), 2);
        assert_eq!(fe_model_observed_count(model), 2);

        let mut pi = vec![0.0f64; 4];
        assert_eq!(fe_model_stationary(model, pi.as_mut_ptr(), 4), FeStatus::Ok);
        let total: f64 = pi.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);

        let mut nondegenerate = -1i32;
        assert_eq!(
            fe_model_is_nondegenerate(model, &mut nondegenerate),
            FeStatus::Ok
        );
        assert_eq!(nondegenerate, 1); // full support

        let mut unique = -1i32;
        assert_eq!(
            fe_model_has_unique_invariant_law(model, &mut unique),
            FeStatus::Ok
        );
        assert_eq!(unique, 1);

        let label = CString::new("umbrella").unwrap();
        let mut y0 = usize::MAX;
        assert_eq!(
            fe_model_observed_index(model, label.as_ptr(), &mut y0),
            FeStatus::Ok
        );
        assert_eq!(y0, 0);

        let mut filter: *mut FeFilter = ptr::null_mut();
        assert_eq!(
            fe_filter_init_stationary(model, y0, &mut filter),
            FeStatus::Ok
        );
        let mut probs = vec![0.0f64; 2];
        assert_eq!(fe_filter_probs(filter, probs.as_mut_ptr(), 2), FeStatus::Ok);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        for y in [1usize, 0, 0, 1, 1] {
            assert_eq!(fe_filter_step(filter, y), FeStatus::Ok);
        }
        let mut ll = f64::NAN;
        assert_eq!(fe_filter_log_likelihood(filter, &mut ll), FeStatus::Ok);
        assert!(ll < 0.0, "five observation moves, log likelihood {ll}");
        assert_eq!(fe_filter_probs(filter, probs.as_mut_ptr(), 2), FeStatus::Ok);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        fe_filter_free(filter);
        fe_model_free(model);
    }
}

#[test]
fn filters_survive_model_free() {
    unsafe {
        let model = zoo_model("example-1.1-noisy:0.1");
        let mut filter: *mut FeFilter = ptr::null_mut();
        assert_eq!(fe_filter_init_uniform(model, 0, &mut filter), FeStatus::Ok);
        fe_model_free(model); // handle gone, shared state must stay alive
        for y in [1usize, 0, 1, 1, 0, 0] {
            assert_eq!(fe_filter_step(filter, y), FeStatus::Ok);
        }
        let mut probs = vec![0.0f64; 4];
        assert_eq!(fe_filter_probs(filter, probs.as_mut_ptr(), 4), FeStatus::Ok);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        fe_filter_free(filter);
    }
}

#[test]
fn filter_matches_library_route() {
    // Same walk computed through the library directly.
    unsafe {
        let model = zoo_model("random-nondegenerate:3x2:7");
        let spec = filter_ergodics::zoo::random_model(3, 2, true, 7);
        let ys = [0usize, 1, 1, 0, 1];
        let mut filter: *mut FeFilter = ptr::null_mut();
        assert_eq!(
            fe_filter_init_stationary(model, ys[0], &mut filter),
            FeStatus::Ok
        );
        for &y in &ys[1..] {
            assert_eq!(fe_filter_step(filter, y), FeStatus::Ok);
        }
        let mut probs = vec![0.0f64; 3];
        assert_eq!(fe_filter_probs(filter, probs.as_mut_ptr(), 3), FeStatus::Ok);

        let run =
            filter_ergodics::filter::run_filter(&spec.kernel, spec.stationary.pi(), &ys).unwrap();
        let expected = run.states.last().unwrap().probs();
        for z in 0..3 {
            assert!(
                (probs[z] - expected[z]).abs() < 1e-14,
                "z = {z}: {} vs {}",
                probs[z],
                expected[z]
            );
        }
        let mut ll = f64::NAN;
        assert_eq!(fe_filter_log_likelihood(filter, &mut ll), FeStatus::Ok);
        let expected_ll = run.log_likelihood.last().unwrap() - run.log_likelihood.first().unwrap();
        assert!((ll - expected_ll).abs() < 1e-12);
        fe_filter_free(filter);
        fe_model_free(model);
    }
}

#[test]
fn status_codes_cover_the_failure_modes() {
    unsafe {
        // Null arguments.
        assert_eq!(
            fe_model_from_json(ptr::null(), ptr::null_mut()),
            FeStatus::NullArgument
        );
        let mut model: *mut FeModel = ptr::null_mut();
        assert_eq!(
            fe_model_from_json(ptr::null(), &mut model),
            FeStatus::NullArgument
        );

        // Invalid UTF-8.
        let bad = CString::new(vec![0xffu8, 0xfe]).unwrap();
        assert_eq!(
            fe_model_from_json(bad.as_ptr(), &mut model),
            FeStatus::InvalidUtf8
        );

        // Parse failure, with a message.
        let not_json = CString::new("{ nope").unwrap();
        assert_eq!(
            fe_model_from_json(not_json.as_ptr(), &mut model),
            FeStatus::ParseError
        );
        assert!(!last_error().is_empty());

        // Validation failure.
        let bad_rows = CString::new(
            r#"{"hidden_labels":["a"],"observed_labels":["0","1"],
                "kernel":{"type":"joint","rows":[[0.5,0.4],[0.5,0.5]]}}"#,
        )
        .unwrap();
        assert_eq!(
            fe_model_from_json(bad_rows.as_ptr(), &mut model),
            FeStatus::ValidationError
        );
        assert!(last_error().contains("sums to"));

        // Unknown zoo name.
        let nope = CString::new("no-such-model").unwrap();
        assert_eq!(
            fe_model_from_zoo(nope.as_ptr(), &mut model),
            FeStatus::ParseError
        );

        let model = zoo_model("example-1.1");

        // Unknown label.
        let ghost = CString::new("ghost").unwrap();
        let mut idx = 0usize;
        assert_eq!(
            fe_model_hidden_index(model, ghost.as_ptr(), &mut idx),
            FeStatus::UnknownLabel
        );

        // Buffer size mismatch.
        let mut small = vec![0.0f64; 3];
        assert_eq!(
            fe_model_stationary(model, small.as_mut_ptr(), 3),
            FeStatus::BufferSize
        );

        // Index out of range.
        let mut filter: *mut FeFilter = ptr::null_mut();
        assert_eq!(
            fe_filter_init_uniform(model, 9, &mut filter),
            FeStatus::IndexOutOfRange
        );
        assert_eq!(
            fe_filter_init_point(model, 11, 0, &mut filter),
            FeStatus::IndexOutOfRange
        );
        fe_model_free(model);

        // Impossible observation: this kernel never emits observation "1",
        // and the filter state must survive the failed move unchanged.
        let silent = CString::new(
            r#"{"hidden_labels":["a"],"observed_labels":["0","1"],
                "kernel":{"type":"joint","rows":[[1.0,0.0],[1.0,0.0]]}}"#,
        )
        .unwrap();
        let mut model: *mut FeModel = ptr::null_mut();
        assert_eq!(fe_model_from_json(silent.as_ptr(), &mut model), FeStatus::Ok);
        assert_eq!(fe_filter_init_uniform(model, 0, &mut filter), FeStatus::Ok);
        assert_eq!(fe_filter_step(filter, 1), FeStatus::ImpossibleObservation);
        assert!(last_error().contains("zero probability"));
        let mut still = vec![0.0f64; 1];
        assert_eq!(fe_filter_probs(filter, still.as_mut_ptr(), 1), FeStatus::Ok);
        assert_eq!(still[0], 1.0);
        assert_eq!(fe_filter_step(filter, 0), FeStatus::Ok);
        fe_filter_free(filter);
        fe_model_free(model);

        // Frees tolerate null.
        fe_model_free(ptr::null_mut());
        fe_filter_free(ptr::null_mut());
    }
}

#[test]
fn last_error_is_truncated_but_reported_in_full_length() {
    unsafe {
        let not_json = CString::new("{ definitely not json at all").unwrap();
        let mut model: *mut FeModel = ptr::null_mut();
        assert_eq!(
            fe_model_from_json(not_json.as_ptr(), &mut model),
            FeStatus::ParseError
        );
        let mut tiny = vec![0i8; 8];
        let full_len = fe_last_error(tiny.as_mut_ptr() as *mut c_char, tiny.len());
        assert!(full_len >= 8, "message should overflow the tiny buffer");
        assert_eq!(tiny[7], 0, "buffer must stay NUL-terminated");
    }
}
