use std::ffi::{CStr, CString};
use std::ptr;

use w1kp_ffi::*;

fn last_error() -> String {
    let p = w1kp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn rows_set(ids: &[&str], values: &[f32], dim: usize) -> *mut W1kpEmbeddings {
    let owned: Vec<CString> = ids.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = owned.iter().map(|c| c.as_ptr()).collect();
    let mut out = ptr::null_mut();
    let status = unsafe {
        w1kp_embeddings_from_rows(ptrs.as_ptr(), values.as_ptr(), ids.len(), dim, &mut out)
    };
    assert_eq!(status, W1kpStatus::Ok, "{}", last_error());
    out
}

#[test]
fn pipeline_matches_library() {
    let values = [0.0f32, 0.0, 3.0, 4.0, 0.0, 1.0, 6.0, 8.0];
    let set = rows_set(&["a", "b", "c", "d"], &values, 2);
    unsafe {
        assert_eq!(w1kp_embeddings_len(set), 4);
        assert_eq!(w1kp_embeddings_dim(set), 2);

        let mut raw = ptr::null_mut();
        assert_eq!(
            w1kp_pairwise(set, W1KP_METRIC_EUCLIDEAN, &mut raw),
            W1kpStatus::Ok
        );
        assert_eq!(w1kp_matrix_size(raw), 4);
        let mut d = 0.0;
        assert_eq!(w1kp_matrix_get(raw, 0, 1, &mut d), W1kpStatus::Ok);
        assert_eq!(d, 5.0);
        assert_eq!(w1kp_matrix_get(raw, 2, 2, &mut d), W1kpStatus::Ok);
        assert_eq!(d, 0.0);
        assert_eq!(w1kp_matrix_get(raw, 4, 0, &mut d), W1kpStatus::Validation);

        let sample: Vec<f64> = (1..=20).map(|i| f64::from(i) * 0.5).collect();
        let mut cdf = ptr::null_mut();
        assert_eq!(
            w1kp_cdf_fit(
                sample.as_ptr(),
                sample.len(),
                W1KP_METRIC_EUCLIDEAN,
                ptr::null(),
                &mut cdf
            ),
            W1kpStatus::Ok
        );
        assert_eq!(w1kp_cdf_len(cdf), 20);
        assert_eq!(w1kp_cdf_metric(cdf), W1KP_METRIC_EUCLIDEAN);
        let mut f = 0.0;
        assert_eq!(w1kp_cdf_apply(cdf, 5.0, &mut f), W1kpStatus::Ok);
        assert_eq!(f, 0.5);

        let mut norm = ptr::null_mut();
        assert_eq!(w1kp_normalize(raw, cdf, &mut norm), W1kpStatus::Ok);
        let mut mean = std::mem::zeroed::<W1kpScore>();
        assert_eq!(w1kp_eta_mean(norm, &mut mean), W1kpStatus::Ok);

        // Same computation through the library directly.
        let lib_set = w1kp::EmbeddingSet::from_flat(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            2,
            values.to_vec(),
            "",
        )
        .unwrap();
        let lib_cdf =
            w1kp::normalization::fit_cdf(sample.clone(), w1kp::MetricKind::Euclidean, "").unwrap();
        let lib_raw =
            w1kp::distance::pairwise_matrix(&lib_set, w1kp::MetricKind::Euclidean).unwrap();
        let lib_norm = w1kp::normalization::normalize_matrix(&lib_raw, &lib_cdf).unwrap();
        let expected = w1kp::variability::eta_mean(&lib_norm).unwrap();
        assert_eq!(mean.eta.to_bits(), expected.eta.to_bits());
        assert_eq!(mean.w1kp.to_bits(), expected.w1kp.to_bits());
        assert_eq!(mean.k, 0);
        assert!(!mean.monte_carlo);

        let mut k3 = std::mem::zeroed::<W1kpScore>();
        assert_eq!(
            w1kp_eta_k(norm, 3, 1000, 100, false, 0, &mut k3),
            W1kpStatus::Ok
        );
        assert_eq!(k3.k, 3);
        assert!(!k3.monte_carlo);
        // Budget 0 forces sampling, which needs a seed.
        assert_eq!(
            w1kp_eta_k(norm, 3, 0, 100, false, 0, &mut k3),
            W1kpStatus::Validation
        );
        assert!(last_error().contains("seed"));
        assert_eq!(
            w1kp_eta_k(norm, 3, 0, 100, true, 9, &mut k3),
            W1kpStatus::Ok
        );
        assert!(k3.monte_carlo);
        assert_eq!((k3.samples, k3.seed), (100, 9));
        assert_eq!(
            w1kp_eta_k(norm, 5, 1000, 100, false, 0, &mut k3),
            W1kpStatus::Validation
        );

        w1kp_matrix_free(norm);
        w1kp_matrix_free(raw);
        w1kp_cdf_free(cdf);
        w1kp_embeddings_free(set);
    }
}

#[test]
fn file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let emb_path = dir.path().join("set.w1kpemb");
    let set = w1kp::EmbeddingSet::from_rows(
        vec!["x".into(), "y".into()],
        vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.25, 0.125]],
        "test",
    )
    .unwrap();
    w1kp::io::write_embeddings(&set, &emb_path).unwrap();
    let c_path = CString::new(emb_path.to_str().unwrap()).unwrap();
    unsafe {
        let mut handle = ptr::null_mut();
        assert_eq!(
            w1kp_embeddings_read(c_path.as_ptr(), &mut handle),
            W1kpStatus::Ok
        );
        assert_eq!(
            (w1kp_embeddings_len(handle), w1kp_embeddings_dim(handle)),
            (2, 3)
        );
        w1kp_embeddings_free(handle);

        let sample = [3.0, 1.0, 2.0];
        let mut cdf = ptr::null_mut();
        let prov = CString::new("unit").unwrap();
        assert_eq!(
            w1kp_cdf_fit(
                sample.as_ptr(),
                3,
                W1KP_METRIC_COSINE,
                prov.as_ptr(),
                &mut cdf
            ),
            W1kpStatus::Ok
        );
        let cdf_path = CString::new(dir.path().join("cdf.json").to_str().unwrap()).unwrap();
        assert_eq!(w1kp_cdf_save(cdf, cdf_path.as_ptr()), W1kpStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(
            w1kp_cdf_load(cdf_path.as_ptr(), &mut loaded),
            W1kpStatus::Ok
        );
        assert_eq!(w1kp_cdf_metric(loaded), W1KP_METRIC_COSINE);
        assert_eq!(w1kp_cdf_len(loaded), 3);
        w1kp_cdf_free(cdf);
        w1kp_cdf_free(loaded);

        let missing = CString::new(dir.path().join("none.json").to_str().unwrap()).unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(w1kp_cdf_load(missing.as_ptr(), &mut none), W1kpStatus::Io);
        assert!(none.is_null());
        let garbage = dir.path().join("garbage.bin");
        std::fs::write(&garbage, b"not an embedding file").unwrap();
        let garbage = CString::new(garbage.to_str().unwrap()).unwrap();
        let mut handle = ptr::null_mut();
        assert_eq!(
            w1kp_embeddings_read(garbage.as_ptr(), &mut handle),
            W1kpStatus::Format
        );
        assert!(last_error().contains("byte 0"));
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            w1kp_embeddings_read(ptr::null(), &mut out),
            W1kpStatus::NullPointer
        );
        assert!(last_error().contains("path"));

        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(
            w1kp_embeddings_read(bad.as_ptr().cast(), &mut out),
            W1kpStatus::InvalidUtf8
        );

        let mut d = 0.0;
        let (a, b) = ([1.0f32, 0.0], [0.0f32, 1.0]);
        assert_eq!(
            w1kp_distance(7, a.as_ptr(), b.as_ptr(), 2, &mut d),
            W1kpStatus::Validation
        );
        assert_eq!(
            w1kp_distance(W1KP_METRIC_COSINE, a.as_ptr(), b.as_ptr(), 2, &mut d),
            W1kpStatus::Ok
        );
        assert_eq!(d, 1.0);
        assert_eq!(
            w1kp_distance(
                W1KP_METRIC_EUCLIDEAN,
                a.as_ptr(),
                b.as_ptr(),
                2,
                ptr::null_mut()
            ),
            W1kpStatus::NullPointer
        );

        let empty: [f64; 0] = [];
        let mut cdf = ptr::null_mut();
        assert_eq!(
            w1kp_cdf_fit(
                empty.as_ptr(),
                0,
                W1KP_METRIC_EUCLIDEAN,
                ptr::null(),
                &mut cdf
            ),
            W1kpStatus::Validation
        );

        let mut level = 99;
        assert_eq!(
            w1kp_classify(0.9, 0.2, 0.4, 0.85, &mut level),
            W1kpStatus::Ok
        );
        assert_eq!(level, W1KP_LEVEL_HIGH);
        assert_eq!(
            w1kp_classify(0.2, 0.2, 0.4, 0.85, &mut level),
            W1kpStatus::Ok
        );
        assert_eq!(level, W1KP_LEVEL_LOW);
        assert_eq!(
            w1kp_classify(0.1, 0.2, 0.4, 0.85, &mut level),
            W1kpStatus::Ok
        );
        assert_eq!(level, W1KP_LEVEL_NONE);
        assert_eq!(
            w1kp_classify(0.5, 0.4, 0.2, 0.85, &mut level),
            W1kpStatus::Validation
        );

        // Duplicate ids are rejected.
        let ids = [CString::new("a").unwrap(), CString::new("a").unwrap()];
        let ptrs = [ids[0].as_ptr(), ids[1].as_ptr()];
        let vals = [0.0f32, 1.0];
        let mut set = ptr::null_mut();
        assert_eq!(
            w1kp_embeddings_from_rows(ptrs.as_ptr(), vals.as_ptr(), 2, 1, &mut set),
            W1kpStatus::Validation
        );
        assert!(set.is_null());

        // NULL handles are accepted by the free and size functions.
        w1kp_embeddings_free(ptr::null_mut());
        w1kp_matrix_free(ptr::null_mut());
        w1kp_cdf_free(ptr::null_mut());
        assert_eq!(w1kp_matrix_size(ptr::null()), 0);
        assert_eq!(w1kp_cdf_metric(ptr::null()), u32::MAX);
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            w1kp_cdf_load(ptr::null(), &mut out),
            W1kpStatus::NullPointer
        );
    }
    let other = std::thread::spawn(|| w1kp_last_error().is_null())
        .join()
        .unwrap();
    assert!(other, "a fresh thread has no error message");
    assert!(!w1kp_last_error().is_null());
}
