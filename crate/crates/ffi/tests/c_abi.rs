#![allow(clippy::excessive_precision)]

use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ultraslow_ffi::*;

// μ ≡ 1 reference values from 25-digit Talbot inversion.
const E_1_1: f64 = 0.410_305_501_591_026_19;
const G_1_1: f64 = 0.123_960_285_962_511_684;

struct Weight(*mut UsWeight);

impl Weight {
    fn unit() -> Self {
        let mut w = ptr::null_mut();
        assert_eq!(unsafe { us_weight_constant(1.0, 0.5, 0.25, &mut w) }, UsStatus::Ok);
        Weight(w)
    }
}

impl Drop for Weight {
    fn drop(&mut self) {
        unsafe { us_weight_free(self.0) }
    }
}

fn last_error() -> String {
    let p = us_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn kernels_through_the_abi() {
    let w = Weight::unit();
    let (mut e, mut g) = (0.0, 0.0);
    unsafe {
        assert_eq!(us_relaxation(w.0, 1.0, 1.0, &mut e), UsStatus::Ok);
        assert_eq!(us_response(w.0, 1.0, 1.0, &mut g), UsStatus::Ok);
    }
    assert!((e - E_1_1).abs() < 1e-10 * E_1_1);
    assert!((g - G_1_1).abs() < 1e-10 * G_1_1);
}

#[test]
fn symbol_and_density() {
    let w = Weight::unit();
    let (mut re, mut im, mut mu) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(us_weight_symbol(w.0, 4.0, 0.0, &mut re, &mut im), UsStatus::Ok);
        assert_eq!(us_weight_density(w.0, 0.3, &mut mu), UsStatus::Ok);
        assert_eq!(us_weight_symbol(w.0, -1.0, 0.0, &mut re, &mut im), UsStatus::Domain);
    }
    // ∫ 4^α dα = 3 / ln 4
    assert!((re - 3.0 / 4f64.ln()).abs() < 1e-13);
    assert_eq!(im, 3.0 / 4f64.ln() * 0.0);
    assert_eq!(mu, 1.0);
}

#[test]
fn errors_are_reported() {
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(us_weight_box(0.5, 0.7, &mut w), UsStatus::Domain);
        assert!(w.is_null());
        assert!(last_error().contains("make_box_weight"));
        assert_eq!(us_weight_box(0.5, 0.1, ptr::null_mut()), UsStatus::NullPointer);
        assert!(last_error().contains("out"));
        let mut v = 0.0;
        assert_eq!(us_relaxation(ptr::null(), 1.0, 1.0, &mut v), UsStatus::NullPointer);
        us_weight_free(ptr::null_mut());
        us_basis_free(ptr::null_mut());
    }
    assert_eq!(unsafe { us_basis_modes(ptr::null()) }, 0);
}

#[test]
fn piecewise_constructor() {
    let breaks = [0.0, 0.4, 1.0];
    let values = [0.0, 2.0];
    let mut w = ptr::null_mut();
    let mut mu = 0.0;
    unsafe {
        assert_eq!(us_weight_piecewise_constant(breaks.as_ptr(), values.as_ptr(), 2, 0.7, 0.2, &mut w), UsStatus::Ok);
        assert_eq!(us_weight_density(w, 0.5, &mut mu), UsStatus::Ok);
        us_weight_free(w);
    }
    assert_eq!(mu, 2.0);
}

#[test]
fn homogeneous_solve() {
    let w = Weight::unit();
    let mut b = ptr::null_mut();
    unsafe { assert_eq!(us_basis_dirichlet(std::f64::consts::PI, 4, &mut b), UsStatus::Ok) };
    assert_eq!(unsafe { us_basis_modes(b) }, 4);
    let mut eig = [0.0; 4];
    unsafe { assert_eq!(us_basis_eigenvalues(b, eig.as_mut_ptr(), 4), UsStatus::Ok) };
    assert_eq!(eig, [1.0, 4.0, 9.0, 16.0]);

    let u0 = [1.0, 0.0, 0.0, 1.0];
    let times = [0.1, 1.0];
    let mut out = [0.0; 8];
    let mut short = [0.0; 7];
    unsafe {
        assert_eq!(us_solve_homogeneous(w.0, b, u0.as_ptr(), 4, times.as_ptr(), 2, out.as_mut_ptr(), 8), UsStatus::Ok);
        assert_eq!(
            us_solve_homogeneous(w.0, b, u0.as_ptr(), 4, times.as_ptr(), 2, short.as_mut_ptr(), 7),
            UsStatus::Dimension
        );
        us_basis_free(b);
    }
    assert!((out[4] - E_1_1).abs() < 1e-10);
    assert!((out[7] - 0.033_455_924_577_376_542).abs() < 1e-10);
    assert_eq!(out[5], 0.0);
}

#[test]
fn fd_basis_matches_exact_spectrum() {
    let a = [1.0];
    let q = [0.0];
    let mut b = ptr::null_mut();
    let mut eig = [0.0; 3];
    unsafe {
        assert_eq!(
            us_basis_fd(a.as_ptr(), 1, q.as_ptr(), 1, 1.0, std::f64::consts::PI, 401, 3, &mut b),
            UsStatus::Ok
        );
        assert_eq!(us_basis_eigenvalues(b, eig.as_mut_ptr(), 3), UsStatus::Ok);
        us_basis_free(b);
    }
    for (n, l) in eig.iter().enumerate() {
        let exact = ((n + 1) * (n + 1)) as f64;
        assert!((l - exact).abs() < 1e-3 * exact, "{l}");
    }
}

#[test]
fn mittag_leffler_entry() {
    let mut v = 0.0;
    unsafe { assert_eq!(us_mittag_leffler(0.5, 1.0, -1.0, &mut v), UsStatus::Ok) };
    assert!((v - 0.427_583_576_155_807).abs() < 1e-13);
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ultraslow.h")).unwrap()
}

#[test]
fn header_declares_every_entry_point() {
    let h = header();
    for f in [
        "us_last_error_message",
        "us_version",
        "us_weight_constant",
        "us_weight_box",
        "us_weight_piecewise_constant",
        "us_weight_free",
        "us_weight_density",
        "us_weight_symbol",
        "us_basis_dirichlet",
        "us_basis_fd",
        "us_basis_free",
        "us_basis_modes",
        "us_basis_eigenvalues",
        "us_relaxation",
        "us_response",
        "us_mittag_leffler",
        "us_solve_homogeneous",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct us_weight us_weight;"));
    assert!(h.contains("US_STATUS_OK = 0"));
}

/// The static library sits next to the test binary in `deps/`, or one level up after `cargo build`.
fn static_library() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [deps.join("libultraslow_ffi.a"), deps.parent()?.join("libultraslow_ffi.a")].into_iter().find(|p| p.exists())
}

#[test]
fn c_program_links_against_static_library() {
    let lib = static_library().expect("static library not built");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ultraslow_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let vals: Vec<f64> = text.split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert!((vals[0] - G_1_1).abs() < 1e-10);
    assert!((vals[1] - E_1_1).abs() < 1e-10);
}
