use std::ffi::{CStr, CString};
use std::ptr;

use quantmerge::gbdt::{fit_quantile_gbdt, save_gbdt, GbdtConfig};
use quantmerge::qrf::{fit_qrf, save_qrf, QrfConfig};
use quantmerge::{Dataset, FeatureMatrix, QuantileLevel};
use quantmerge_ffi::*;

fn toy() -> (Vec<f64>, Dataset) {
    let n = 200;
    let mut x = Vec::with_capacity(n * 2);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let a = (i % 17) as f64;
        let b = (i * 7 % 23) as f64;
        x.extend([a, b]);
        y.push(if i % 3 == 0 {
            0.0
        } else {
            a * 0.5 + b * 0.1 + (i % 5) as f64
        });
    }
    let d = Dataset::new(FeatureMatrix::new(x.clone(), 2).unwrap(), y).unwrap();
    (x, d)
}

fn cpath(p: &std::path::Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qm_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn gbdt_handle_matches_native_predictions() {
    let (x, data) = toy();
    let tau = QuantileLevel::new(0.9).unwrap();
    let cfg = GbdtConfig {
        num_iterations: 20,
        min_data_in_leaf: 5,
        ..GbdtConfig::new(tau)
    };
    let model = fit_quantile_gbdt(&data, None, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.model");
    save_gbdt(&model, &path).unwrap();

    let mut h: *mut QmGbdt = ptr::null_mut();
    assert_eq!(
        unsafe { qm_gbdt_load(cpath(&path).as_ptr(), &mut h) },
        QmStatus::Ok
    );
    let mut nf = 0usize;
    assert_eq!(unsafe { qm_gbdt_n_features(h, &mut nf) }, QmStatus::Ok);
    assert_eq!(nf, 2);
    let n = data.len();
    let mut out = vec![0.0; n];
    assert_eq!(
        unsafe { qm_gbdt_predict(h, x.as_ptr(), n, 2, out.as_mut_ptr()) },
        QmStatus::Ok
    );
    let native = model.predict(&data.x).unwrap();
    assert!(out
        .iter()
        .zip(&native)
        .all(|(a, b)| a.to_bits() == b.to_bits()));

    assert_eq!(
        unsafe { qm_gbdt_predict(h, x.as_ptr(), n / 2, 4, out.as_mut_ptr()) },
        QmStatus::FeatureMismatch
    );
    assert!(last_error().contains('4'));
    unsafe { qm_gbdt_free(h) };
    unsafe { qm_gbdt_free(ptr::null_mut()) };
}

#[test]
fn qrf_handle_matches_native_predictions() {
    let (x, data) = toy();
    let cfg = QrfConfig {
        n_trees: 10,
        mtry: 1,
        min_node_size: 3,
        seed: 4,
        ..QrfConfig::default()
    };
    let model = fit_qrf(&data, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.model");
    save_qrf(&model, &path).unwrap();

    let mut h: *mut QmQrf = ptr::null_mut();
    assert_eq!(
        unsafe { qm_qrf_load(cpath(&path).as_ptr(), &mut h) },
        QmStatus::Ok
    );
    let taus = [0.1, 0.5, 0.99];
    let n = 50;
    let mut out = vec![0.0; n * taus.len()];
    let st = unsafe {
        qm_qrf_predict(
            h,
            x.as_ptr(),
            n,
            2,
            taus.as_ptr(),
            taus.len(),
            out.as_mut_ptr(),
        )
    };
    assert_eq!(st, QmStatus::Ok);
    let sub = FeatureMatrix::new(x[..n * 2].to_vec(), 2).unwrap();
    let native = model.predict(&sub, &taus).unwrap();
    for (i, row) in native.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            assert_eq!(out[i * taus.len() + k].to_bits(), v.to_bits());
        }
    }
    unsafe { qm_qrf_free(h) };
}

#[test]
fn load_failures_report_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cpath(&dir.path().join("none.model"));
    let mut g: *mut QmGbdt = ptr::null_mut();
    assert_eq!(
        unsafe { qm_gbdt_load(missing.as_ptr(), &mut g) },
        QmStatus::Io
    );
    assert!(g.is_null());
    let junk = dir.path().join("junk.model");
    std::fs::write(&junk, "not a model\n").unwrap();
    assert_eq!(
        unsafe { qm_gbdt_load(cpath(&junk).as_ptr(), &mut g) },
        QmStatus::Parse
    );
    let mut q: *mut QmQrf = ptr::null_mut();
    assert_eq!(
        unsafe { qm_qrf_load(cpath(&junk).as_ptr(), &mut q) },
        QmStatus::Parse
    );
    assert_eq!(
        unsafe { qm_qrf_load(ptr::null(), &mut q) },
        QmStatus::NullPointer
    );
    assert_eq!(
        unsafe { qm_gbdt_predict(ptr::null(), ptr::null(), 0, 1, ptr::null_mut()) },
        QmStatus::NullPointer
    );
}

#[test]
fn scores_match_core() {
    let p = [1.0, 2.0, 0.0, 4.0];
    let y = [0.5, 3.0, 0.0, 1.0];
    let tau = QuantileLevel::new(0.7).unwrap();
    let mut v = 0.0;
    assert_eq!(
        unsafe { qm_mean_quantile_score(p.as_ptr(), y.as_ptr(), 4, 0.7, &mut v) },
        QmStatus::Ok
    );
    assert_eq!(
        v,
        quantmerge::scoring::mean_quantile_score(&p, &y, tau).unwrap()
    );
    assert_eq!(
        unsafe { qm_frequency_score(p.as_ptr(), y.as_ptr(), 4, 0.7, &mut v) },
        QmStatus::Ok
    );
    assert_eq!(
        v,
        quantmerge::scoring::frequency_score(&p, &y, tau).unwrap()
    );
    assert_eq!(
        unsafe { qm_mean_quantile_score(p.as_ptr(), ptr::null(), 4, 0.7, &mut v) },
        QmStatus::NullPointer
    );
    assert_eq!(
        unsafe { qm_quantile_skill_score(0.5, 2.0, &mut v) },
        QmStatus::Ok
    );
    assert_eq!(v, 0.75);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/quantmerge.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "qm_gbdt_load",
        "qm_qrf_predict",
        "qm_last_error",
        "QM_STATUS_UNDEFINED_SKILL",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(st) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", header])
        .status()
    else {
        return;
    };
    assert!(st.success());
}
