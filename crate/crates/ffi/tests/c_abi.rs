use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ia_feasibility_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = iaf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sample(family: &str, params: &str, k: usize, seed: u64) -> *mut IafChannel {
    let mut ch = ptr::null_mut();
    let status = unsafe { iaf_channel_sample(cstr(family).as_ptr(), cstr(params).as_ptr(), k, seed, &mut ch) };
    assert_eq!(status, IafStatus::Ok);
    ch
}

#[test]
fn solve_verify_and_read_back() {
    let ch = sample("mimo-constant", "Mt=2,Mr=2", 3, 1);
    let (mut k, mut nr, mut nt) = (0, 0, 0);
    unsafe {
        assert_eq!(iaf_channel_dims(ch, &mut k, &mut nr, &mut nt), IafStatus::Ok);
        assert_eq!((k, nr, nt), (3, 2, 2));

        let cfg = iaf_solver_config_default();
        let mut beams = ptr::null_mut();
        let mut report = IafReport::default();
        assert_eq!(iaf_solve(ch, &cfg, &mut beams, &mut report), IafStatus::Ok);
        assert_eq!(report.feasible, 1);

        let mut leak = f64::NAN;
        assert_eq!(iaf_leakage(ch, beams, &mut leak), IafStatus::Ok);
        assert_eq!(leak, report.best_leakage);
        let mut ok = -1;
        assert_eq!(iaf_verify(ch, beams, cfg.tol_leakage, cfg.tol_margin, &mut ok), IafStatus::Ok);
        assert_eq!(ok, 1);

        let mut u = vec![0.0; 2 * nr * k];
        let mut v = vec![0.0; 2 * nt * k];
        for user in 0..k {
            assert_eq!(iaf_beams_receive(beams, user, u[2 * nr * user..].as_mut_ptr(), 2 * nr), IafStatus::Ok);
            assert_eq!(iaf_beams_transmit(beams, user, v[2 * nt * user..].as_mut_ptr(), 2 * nt), IafStatus::Ok);
        }
        let mut copy = ptr::null_mut();
        assert_eq!(iaf_beams_new(k, nr, nt, u.as_ptr(), v.as_ptr(), &mut copy), IafStatus::Ok);
        let mut leak_copy = f64::NAN;
        assert_eq!(iaf_leakage(ch, copy, &mut leak_copy), IafStatus::Ok);
        assert!((leak_copy - leak).abs() < 1e-15);

        iaf_beams_free(copy);
        iaf_beams_free(beams);
        iaf_channel_free(ch);
    }
}

#[test]
fn orthogonal_scheme_verifies() {
    let ch = sample("mimo-generic-ext", "Mt=1,Mr=2,T=2", 4, 3);
    unsafe {
        let mut beams = ptr::null_mut();
        assert_eq!(iaf_orthogonal_scheme(ch, ptr::null(), &mut beams), IafStatus::Ok);
        let mut ok = 0;
        assert_eq!(iaf_verify(ch, beams, 1e-9, 1e-4, &mut ok), IafStatus::Ok);
        assert_eq!(ok, 1);
        iaf_beams_free(beams);
        iaf_channel_free(ch);
    }
}

#[test]
fn bounds_values() {
    let mut b = IafBounds::default();
    let status = unsafe { iaf_bounds(cstr("mimo-constant-ext").as_ptr(), cstr("Mt=1,Mr=2,T=2").as_ptr(), &mut b) };
    assert_eq!(status, IafStatus::Ok);
    assert_eq!((b.n, b.l, b.upper_k, b.achievable_k), (2, 2, 5, 4));
    let status = unsafe { iaf_bounds(cstr("siso-generic-ext").as_ptr(), cstr("T=2").as_ptr(), &mut b) };
    assert_eq!(status, IafStatus::Ok);
    assert_eq!((b.upper_k, b.achievable_k, b.dof_upper), (3, 2, 1.5));
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut ch = ptr::null_mut();
        let status = iaf_channel_sample(cstr("no-such-family").as_ptr(), ptr::null(), 2, 0, &mut ch);
        assert_eq!(status, IafStatus::InvalidArgument);
        assert!(ch.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(iaf_channel_sample(ptr::null(), ptr::null(), 2, 0, &mut ch), IafStatus::NullPointer);
        assert!(last_error().contains("family"));

        let ch = sample("siso-generic-ext", "T=2", 2, 0);
        let mut beams = ptr::null_mut();
        assert_eq!(iaf_solve(ch, ptr::null(), ptr::null_mut(), ptr::null_mut()), IafStatus::NullPointer);
        assert_eq!(iaf_solve(ptr::null(), ptr::null(), &mut beams, ptr::null_mut()), IafStatus::NullPointer);

        let bad = IafSolverConfig { restarts: 0, ..iaf_solver_config_default() };
        assert_eq!(iaf_solve(ch, &bad, &mut beams, ptr::null_mut()), IafStatus::InvalidArgument);

        let u = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let mut wrong = ptr::null_mut();
        assert_eq!(iaf_beams_new(3, 1, 1, u.as_ptr(), u.as_ptr(), &mut wrong), IafStatus::Ok);
        let mut leak = 0.0;
        assert_eq!(iaf_leakage(ch, wrong, &mut leak), IafStatus::DimensionMismatch);

        let mut small = [0.0; 1];
        assert_eq!(iaf_beams_transmit(wrong, 0, small.as_mut_ptr(), 1), IafStatus::DimensionMismatch);
        assert_eq!(iaf_beams_transmit(wrong, 9, small.as_mut_ptr(), 1), IafStatus::InvalidArgument);

        let mut scheme = ptr::null_mut();
        let ch5 = sample("siso-generic-ext", "T=2", 5, 0);
        assert_eq!(iaf_orthogonal_scheme(ch5, ptr::null(), &mut scheme), IafStatus::Unsupported);

        iaf_beams_free(wrong);
        iaf_channel_free(ch5);
        iaf_channel_free(ch);
        iaf_channel_free(ptr::null_mut());
        iaf_beams_free(ptr::null_mut());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(iaf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("ia_feasibility.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "iaf_channel_sample",
        "iaf_channel_free",
        "iaf_channel_dims",
        "iaf_beams_new",
        "iaf_beams_free",
        "iaf_beams_receive",
        "iaf_beams_transmit",
        "iaf_solve",
        "iaf_orthogonal_scheme",
        "iaf_leakage",
        "iaf_verify",
        "iaf_bounds",
        "iaf_last_error_message",
        "iaf_solver_config_default",
        "typedef struct IafChannel IafChannel",
        "IAF_STATUS_NULL_POINTER = 1",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "ia_feasibility.h"

int main(void) {
    IafChannel *ch = NULL;
    if (iaf_channel_sample("mimo-constant", "Mt=2,Mr=2", 3, 7, &ch) != IAF_STATUS_OK) return 1;
    IafSolverConfig cfg = iaf_solver_config_default();
    IafBeams *beams = NULL;
    IafReport report;
    if (iaf_solve(ch, &cfg, &beams, &report) != IAF_STATUS_OK) return 2;
    int ok = 0;
    if (iaf_verify(ch, beams, cfg.tol_leakage, cfg.tol_margin, &ok) != IAF_STATUS_OK) return 3;
    IafChannel *bad = NULL;
    if (iaf_channel_sample("nope", NULL, 2, 0, &bad) != IAF_STATUS_INVALID_ARGUMENT) return 4;
    printf("%d %d\n", report.feasible, ok);
    iaf_beams_free(beams);
    iaf_channel_free(ch);
    return 0;
}
"#;

/// Compiles a small C program against the generated header and the shared
/// library, then runs it.
#[test]
fn c_program_links_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    assert!(lib_dir.join("libia_feasibility_ffi.so").exists(), "{} has no shared library", lib_dir.display());
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lia_feasibility_ffi")
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1 1");
}
