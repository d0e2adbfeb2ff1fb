use std::ffi::{CStr, CString};
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use kerrcat_ffi::*;

fn last_error() -> String {
    let p = kc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn params() -> *mut KcParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { kc_params_new(&mut p) }, KcStatus::Ok);
    p
}

fn name(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(kc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn params_roundtrip_and_errors() {
    let p = params();
    unsafe {
        let mut v = 0.0;
        assert_eq!(kc_params_get(p, name("alpha").as_ptr(), &mut v), KcStatus::Ok);
        assert_eq!(v, 1.3);
        assert_eq!(kc_params_set(p, name("xi").as_ptr(), 1.5), KcStatus::Ok);
        kc_params_get(p, name("xi").as_ptr(), &mut v);
        assert_eq!(v, 1.5);
        assert!(kc_last_error_message().is_null());

        assert_eq!(kc_params_set(p, name("beta").as_ptr(), 1.0), KcStatus::InvalidArgument);
        assert!(last_error().contains("beta"));
        assert_eq!(kc_params_set(p, ptr::null(), 1.0), KcStatus::NullPointer);
        assert_eq!(kc_params_get(p, name("xi").as_ptr(), ptr::null_mut()), KcStatus::NullPointer);

        kc_params_set(p, name("alpha").as_ptr(), 3.0);
        assert_eq!(kc_params_validate(p), KcStatus::Validation);
        assert!(last_error().contains("truncation"), "{}", last_error());
        kc_params_free(p);
        kc_params_free(ptr::null_mut());
        assert_eq!(kc_params_new(ptr::null_mut()), KcStatus::NullPointer);
    }
}

#[test]
fn effective_simulation_matches_closed_form() {
    let p = params();
    let times: Vec<f64> = (0..21).map(|k| 0.05 * k as f64).collect();
    let mut out = vec![0.0; times.len()];
    unsafe {
        for life in ["t1_a", "t2r_a", "t1_b", "t2r_b"] {
            assert_eq!(kc_params_set(p, name(life).as_ptr(), f64::INFINITY), KcStatus::Ok);
        }
        let status = kc_simulate(
            p,
            KcModel::Effective as u32,
            KcKcqInit::CatPlus as u32,
            KcTransmonInit::PlusZ as u32,
            KcObservable::ZTransmon as u32,
            times.as_ptr(),
            times.len(),
            1e-3,
            out.as_mut_ptr(),
        );
        assert_eq!(status, KcStatus::Ok, "{}", last_error());
        let omega = 0.45 * 2.04 * 1.3;
        for (t, z) in times.iter().zip(&out) {
            assert!((z - (2.0 * TAU * omega * t).cos()).abs() < 1e-6, "t={t}");
        }
        let bad = kc_simulate(p, 9, 0, 0, 0, times.as_ptr(), times.len(), 1e-3, out.as_mut_ptr());
        assert_eq!(bad, KcStatus::InvalidArgument);
        let bad = kc_simulate(p, 0, 0, 0, 0, times.as_ptr(), 0, 1e-3, out.as_mut_ptr());
        assert_eq!(bad, KcStatus::InvalidArgument);
        let bad = kc_simulate(p, 1, 0, 0, 0, times.as_ptr(), times.len(), -1.0, out.as_mut_ptr());
        assert_eq!(bad, KcStatus::Validation);
        kc_params_free(p);
    }
}

#[test]
fn fits_through_handles() {
    let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.02).collect();
    let y: Vec<f64> = t.iter().map(|t| 0.8 * (TAU * 1.7 * t).cos() * (-t / 5.0).exp()).collect();
    unsafe {
        let mut fit = ptr::null_mut();
        assert_eq!(kc_fit_damped_sinusoid(t.as_ptr(), y.as_ptr(), t.len(), &mut fit), KcStatus::Ok);
        let (mut f, mut s) = (0.0, 0.0);
        assert_eq!(kc_fit_value(fit, name("frequency").as_ptr(), &mut f, &mut s), KcStatus::Ok);
        assert!((f - 1.7).abs() < 1e-8 && s >= 0.0);
        let mut tau = 0.0;
        kc_fit_value(fit, name("tau").as_ptr(), &mut tau, ptr::null_mut());
        assert!((tau - 5.0).abs() < 1e-6);
        let mut conv = -1;
        assert_eq!(kc_fit_status(fit, &mut conv, ptr::null_mut()), KcStatus::Ok);
        assert_eq!(conv, 1);
        assert_eq!(kc_fit_value(fit, name("nope").as_ptr(), &mut f, ptr::null_mut()), KcStatus::InvalidArgument);
        kc_fit_free(fit);

        let v: Vec<f64> = (0..11).map(|k| 200.0 * k as f64).collect();
        let freq: Vec<f64> = v.iter().map(|v| 5200.0 - 0.7 * (6.57e-4 * v).powi(2)).collect();
        let mut fit = ptr::null_mut();
        assert_eq!(kc_fit_stark_shift(5200.0, 0.7, v.as_ptr(), freq.as_ptr(), v.len(), &mut fit), KcStatus::Ok);
        let mut c = 0.0;
        kc_fit_value(fit, name("c").as_ptr(), &mut c, ptr::null_mut());
        assert!((c / 6.57e-4 - 1.0).abs() < 1e-10);
        kc_fit_free(fit);

        let zeros = [0.0; 4];
        let status = kc_fit_stark_shift(5200.0, 0.7, zeros.as_ptr(), freq.as_ptr(), 4, &mut fit);
        assert_eq!(status, KcStatus::Fit);

        let xi = [0.5, 1.0, 1.5, 2.0, 2.5];
        let omega: Vec<f64> = xi.iter().map(|x| 0.45 * x * 1.3).collect();
        let mut fit = ptr::null_mut();
        assert_eq!(kc_extract_g3_tilde(xi.as_ptr(), omega.as_ptr(), 5, 1.3, &mut fit), KcStatus::Ok);
        let mut g = 0.0;
        kc_fit_value(fit, name("g3_tilde").as_ptr(), &mut g, ptr::null_mut());
        assert!((g - 0.45).abs() < 1e-12);
        kc_fit_free(fit);
    }
}

#[test]
fn snail_symmetric_point_has_no_cubic_term() {
    let spec = KcSnailSpec {
        e_c: 109.0,
        e_l: 127_287.0,
        l_j_nh: 0.6,
        asymmetry: 0.1,
        n_junctions: 3,
        n_snails: 2,
    };
    let mut out = KcSnailPoint::default();
    unsafe {
        assert_eq!(kc_snail_point(&spec, 0.0, &mut out), KcStatus::Ok);
        assert!(out.g3.abs() < 1e-9);
        assert!((out.omega - 5930.0).abs() < 1.0);
        let bad = KcSnailSpec { asymmetry: 1.5, ..spec };
        assert_eq!(kc_snail_point(&bad, 0.2, &mut out), KcStatus::Validation);
        assert_eq!(kc_snail_point(ptr::null(), 0.2, &mut out), KcStatus::NullPointer);
    }
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

/// The shipped header compiles, links against the static library and
/// drives a fit from C.
#[test]
fn header_compiles_and_links_from_c() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let lib = target_dir().join("libkerrcat_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipping", lib.display());
        return;
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "kerrcat.h"
int main(void) {
    double v[5] = {0, 500, 1000, 1500, 2000}, f[5];
    for (int i = 0; i < 5; i++) f[i] = 5200.0 - 0.7 * pow(6.57e-4 * v[i], 2);
    KcFit *fit = NULL;
    if (kc_fit_stark_shift(5200.0, 0.7, v, f, 5, &fit) != KC_STATUS_OK) return 1;
    double c = 0;
    if (kc_fit_value(fit, "c", &c, NULL) != KC_STATUS_OK) return 2;
    kc_fit_free(fit);
    KcParams *p = NULL;
    kc_params_new(&p);
    if (kc_params_set(p, "bogus", 1.0) != KC_STATUS_INVALID_ARGUMENT) return 3;
    if (kc_last_error_message() == NULL) return 4;
    kc_params_free(p);
    printf("%.12e\n", c);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let c: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((c / 6.57e-4 - 1.0).abs() < 1e-10);
}
