use std::ffi::{CStr, CString};
use std::os::raw::c_int;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use chiraldyn_ffi::*;

const TAU: f64 = std::f64::consts::TAU;

fn last_error() -> String {
    unsafe { CStr::from_ptr(chiraldyn_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn desk_params() -> ChiraldynModelParams {
    let gamma = TAU * 100.0;
    let kappa = TAU * 1000.0;
    let g = (0.35 * gamma * kappa / 4.0).sqrt();
    ChiraldynModelParams {
        g1: g,
        g2: g,
        gamma_spin: gamma,
        kappa1: kappa,
        kappa2: kappa,
        delta_spin: 0.0,
        carrier_hz: 298_800.0,
    }
}

fn tmsv(r: f64) -> Vec<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    vec![
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    ]
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(chiraldyn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn coupling_table() {
    let mut k = ChiraldynCoupling::Dbs;
    let cases = [
        ((0, 1), (0, 1), ChiraldynCoupling::Dbs),
        ((0, 1), (0, -1), ChiraldynCoupling::Nhpa),
        ((0, 1), (1, 1), ChiraldynCoupling::Nhpa),
        ((0, 1), (1, -1), ChiraldynCoupling::Dbs),
    ];
    for ((h1, d1), (h2, d2), want) in cases {
        assert_eq!(
            unsafe { chiraldyn_coupling_kind(h1, d1, h2, d2, &mut k) },
            ChiraldynStatus::Ok
        );
        assert_eq!(k, want);
    }
    assert_eq!(
        unsafe { chiraldyn_coupling_kind(2, 1, 0, 1, &mut k) },
        ChiraldynStatus::InvalidArgument
    );
    assert!(last_error().contains("handedness"));
    assert_eq!(
        unsafe { chiraldyn_coupling_kind(0, 0, 0, 1, &mut k) },
        ChiraldynStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { chiraldyn_coupling_kind(0, 1, 0, 1, ptr::null_mut()) },
        ChiraldynStatus::NullPointer
    );
}

#[test]
fn state_round_trip_and_metrics() {
    let cov = tmsv(0.4);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(chiraldyn_state_new(2, cov.as_ptr(), &mut s), ChiraldynStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(chiraldyn_state_n_modes(s), 2);

        let mut back = vec![0.0; 16];
        assert_eq!(chiraldyn_state_cov(s, back.as_mut_ptr(), 16), ChiraldynStatus::Ok);
        assert_eq!(back, cov);
        assert_eq!(
            chiraldyn_state_cov(s, back.as_mut_ptr(), 15),
            ChiraldynStatus::BufferTooSmall
        );

        let mut ok = false;
        assert_eq!(chiraldyn_state_is_physical(s, 0.0, &mut ok), ChiraldynStatus::Ok);
        assert!(ok);

        let mut nu = [0.0; 2];
        assert_eq!(
            chiraldyn_state_symplectic_eigenvalues(s, nu.as_mut_ptr(), 2),
            ChiraldynStatus::Ok
        );
        assert!(nu.iter().all(|v| (v - 1.0).abs() < 1e-9), "{nu:?}");

        let (mut d, mut branch) = (0.0, 0 as c_int);
        assert_eq!(chiraldyn_state_discord(s, 1, &mut d, &mut branch), ChiraldynStatus::Ok);
        // Pure two-mode squeezed vacuum: discord equals the entanglement
        // entropy. h(ν) is steep at ν₋ = 1, hence the looser tolerance.
        let n = 0.4f64.sinh().powi(2);
        let want = (n + 1.0) * (n + 1.0).log2() - n * n.log2();
        assert!((d - want).abs() < 1e-6, "{d} vs {want}");
        assert!(branch == 1 || branch == 2);
        assert_eq!(
            chiraldyn_state_discord(s, 1, &mut d, ptr::null_mut()),
            ChiraldynStatus::Ok
        );
        assert_eq!(
            chiraldyn_state_discord(s, 5, &mut d, ptr::null_mut()),
            ChiraldynStatus::InvalidArgument
        );

        let mut q = 0.0;
        assert_eq!(chiraldyn_state_q(s, &mut q), ChiraldynStatus::Ok);
        assert!(q > 0.0);
        chiraldyn_state_free(s);
    }
}

#[test]
fn rejects_bad_states() {
    let mut s = ptr::null_mut();
    let mut asym = tmsv(0.1);
    asym[1] = 0.5;
    unsafe {
        assert_eq!(
            chiraldyn_state_new(2, asym.as_ptr(), &mut s),
            ChiraldynStatus::InvalidArgument
        );
        assert!(s.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            chiraldyn_state_new(2, ptr::null(), &mut s),
            ChiraldynStatus::NullPointer
        );
        assert_eq!(
            chiraldyn_state_new(0, asym.as_ptr(), &mut s),
            ChiraldynStatus::InvalidArgument
        );

        let unphysical = [0.5, 0.0, 0.0, 0.5];
        assert_eq!(chiraldyn_state_new(1, unphysical.as_ptr(), &mut s), ChiraldynStatus::Ok);
        let mut ok = true;
        assert_eq!(chiraldyn_state_is_physical(s, 1e-9, &mut ok), ChiraldynStatus::Ok);
        assert!(!ok);
        let mut q = 0.0;
        assert_eq!(chiraldyn_state_q(s, &mut q), ChiraldynStatus::InvalidArgument);
        chiraldyn_state_free(s);

        let mean = [1.0, -2.0];
        let vac = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(
            chiraldyn_state_new_displaced(1, mean.as_ptr(), vac.as_ptr(), &mut s),
            ChiraldynStatus::Ok
        );
        chiraldyn_state_free(s);
        chiraldyn_state_free(ptr::null_mut());
        assert_eq!(chiraldyn_state_n_modes(ptr::null()), 0);
    }
}

#[test]
fn model_steady_state_and_spectrum() {
    let p = desk_params();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            chiraldyn_model_new(ChiraldynCoupling::Nhpa as c_int, &p, &mut m),
            ChiraldynStatus::Ok
        );
        assert!((chiraldyn_model_cooperativity(m) - 0.35).abs() < 1e-12);

        let mut ss = ptr::null_mut();
        assert_eq!(chiraldyn_model_steady_state(m, &mut ss), ChiraldynStatus::Ok);
        assert_eq!(chiraldyn_state_n_modes(ss), 3);
        chiraldyn_state_free(ss);

        let mut out = ptr::null_mut();
        assert_eq!(
            chiraldyn_model_output_state(m, 298_800.0, &mut out),
            ChiraldynStatus::Ok
        );
        let mut q = 0.0;
        assert_eq!(chiraldyn_state_q(out, &mut q), ChiraldynStatus::Ok);
        assert!((q - 8.0 * 0.35 * (2.0 * 0.35 + 1.0)).abs() < 1e-9, "{q}");
        chiraldyn_state_free(out);

        let freq: Vec<f64> = (0..41).map(|i| 298_600.0 + 10.0 * f64::from(i)).collect();
        let mut vals = vec![0.0; freq.len()];
        let sel = CString::new("X1").unwrap();
        assert_eq!(
            chiraldyn_model_spectrum(m, sel.as_ptr(), freq.as_ptr(), freq.len(), 0.0, vals.as_mut_ptr()),
            ChiraldynStatus::Ok
        );
        let peak = vals.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, vals[20]);
        assert!(peak > 1.0);
        let bad = CString::new("Z9").unwrap();
        assert_ne!(
            chiraldyn_model_spectrum(m, bad.as_ptr(), freq.as_ptr(), freq.len(), 0.0, vals.as_mut_ptr()),
            ChiraldynStatus::Ok
        );
        chiraldyn_model_free(m);

        let mut hot = p;
        hot.g1 *= 2.0;
        hot.g2 *= 2.0;
        assert_eq!(
            chiraldyn_model_new(ChiraldynCoupling::Nhpa as c_int, &hot, &mut m),
            ChiraldynStatus::AboveThreshold
        );
        assert!(last_error().contains("threshold"));
        assert_eq!(chiraldyn_model_new(7, &p, &mut m), ChiraldynStatus::InvalidArgument);
    }
}

#[test]
fn bessel_entry_points() {
    assert!((chiraldyn_bessel_j(0, 2.404825557695773)).abs() < 1e-12);
    let nu: Vec<f64> = (0..12).map(|i| 1000.0 + 800.0 * f64::from(i)).collect();
    let amp: Vec<f64> = nu.iter().map(|v| 0.7 * chiraldyn_bessel_j(1, 5000.0 / v)).collect();
    let (mut k, mut a, mut r) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            chiraldyn_bessel_fit(1, nu.as_ptr(), amp.as_ptr(), nu.len(), &mut k, &mut a, &mut r),
            ChiraldynStatus::Ok
        );
        assert!((k / 5000.0 - 1.0).abs() < 1e-6 && (a / 0.7 - 1.0).abs() < 1e-6);
        let flat = vec![1.0; nu.len()];
        assert_eq!(
            chiraldyn_bessel_fit(0, nu.as_ptr(), flat.as_ptr(), nu.len(), &mut k, &mut a, ptr::null_mut()),
            ChiraldynStatus::FitFailure
        );
        assert_eq!(
            chiraldyn_bessel_fit(3, nu.as_ptr(), amp.as_ptr(), nu.len(), &mut k, &mut a, ptr::null_mut()),
            ChiraldynStatus::InvalidArgument
        );
    }
}

fn find_staticlib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    exe.ancestors()
        .skip(1)
        .take(3)
        .map(|d| d.join("libchiraldyn_ffi.a"))
        .find(|p| p.exists())
}

#[test]
fn c_program_compiles_and_runs_against_header() {
    let Some(lib) = find_staticlib() else {
        panic!(
            "libchiraldyn_ffi.a not found next to {:?}",
            std::env::current_exe().unwrap()
        );
    };
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "chiraldyn.h"
int main(void) {
    enum ChiraldynCoupling k;
    if (chiraldyn_coupling_kind(0, 1, 0, -1, &k) != CHIRALDYN_STATUS_OK || k != CHIRALDYN_COUPLING_NHPA) return 1;
    double cov[16] = {1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1};
    ChiraldynState *s = NULL;
    if (chiraldyn_state_new(2, cov, &s) != CHIRALDYN_STATUS_OK) return 2;
    double q = -1.0, d = -1.0;
    if (chiraldyn_state_q(s, &q) != CHIRALDYN_STATUS_OK || q != 0.0) return 3;
    if (chiraldyn_state_discord(s, 1, &d, NULL) != CHIRALDYN_STATUS_OK || d != 0.0) return 4;
    chiraldyn_state_free(s);
    if (chiraldyn_state_new(2, NULL, &s) != CHIRALDYN_STATUS_NULL_POINTER) return 5;
    printf("%s|%s\n", chiraldyn_version(), chiraldyn_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")));
    assert!(text.contains("`cov` is null"));
}
