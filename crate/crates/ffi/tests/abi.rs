use biortho::kernels::{kernel_laguerre, EnsembleSpec, Family, FiniteKernel};
use biortho_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { biortho_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn kernel_handle_round_trip() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { biortho_kernel_new(BiorthoFamily::Laguerre, 0.5, 2.0, 4, &mut k) }, BiorthoStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { biortho_kernel_eval(k, 0.7, 1.3, &mut v) }, BiorthoStatus::Ok);
    assert_eq!(v, kernel_laguerre(0.5, 2.0, 4, 0.7, 1.3).unwrap());
    let pts = [0.4, 1.1];
    assert_eq!(unsafe { biortho_kernel_correlation(k, pts.as_ptr(), 2, &mut v) }, BiorthoStatus::Ok);
    let spec = EnsembleSpec::new(Family::Laguerre, 0.5, 2.0, 4).unwrap();
    assert_eq!(v, FiniteKernel::new(spec).unwrap().correlation(&pts).unwrap());
    assert_eq!(unsafe { biortho_kernel_eval_scaled(k, 1.0, 2.0, &mut v) }, BiorthoStatus::Ok);
    let outside = [-1.0];
    assert_eq!(unsafe { biortho_kernel_correlation(k, outside.as_ptr(), 1, &mut v) }, BiorthoStatus::Domain);
    assert!(last_error().contains("outside"), "{}", last_error());
    unsafe { biortho_kernel_free(k) };
    unsafe { biortho_kernel_free(ptr::null_mut()) };
}

#[test]
fn invalid_arguments_report_status() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { biortho_kernel_new(BiorthoFamily::Jacobi, -1.0, 1.0, 3, &mut k) }, BiorthoStatus::Domain);
    assert!(k.is_null());
    assert!(last_error().contains("alpha must be > -1"));
    assert_eq!(unsafe { biortho_kernel_new(BiorthoFamily::Jacobi, 0.0, 1.0, 3, ptr::null_mut()) }, BiorthoStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { biortho_kernel_eval(ptr::null(), 0.5, 0.5, &mut v) }, BiorthoStatus::NullPointer);
    let bogus = CString::new("bogus").unwrap();
    let mut passed = false;
    assert_eq!(unsafe { biortho_verify_suite(bogus.as_ptr(), &mut passed) }, BiorthoStatus::Domain);
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { biortho_wright_bessel(1.0, 1.0, 0.0, &mut v) }, BiorthoStatus::Ok);
    assert_eq!(v, 1.0);
    assert_eq!(unsafe { biortho_limit_kernel_hermite(0.0, 1.0, 0.5, 0.5, &mut v) }, BiorthoStatus::Ok);
    assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-10);
    assert_eq!(unsafe { biortho_limit_kernel(0.0, 0.0, 1.0, 1.0, &mut v) }, BiorthoStatus::Domain);
    let version = unsafe { CStr::from_ptr(biortho_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
    let name = CString::new("reductions").unwrap();
    let mut passed = false;
    assert_eq!(unsafe { biortho_verify_suite(name.as_ptr(), &mut passed) }, BiorthoStatus::Ok);
    assert!(passed);
}

#[test]
fn sampling_through_handles() {
    let mut cfg = biortho_chain_config_default();
    cfg.steps = 1200;
    cfg.burn_in = 200;
    cfg.thin = 10;
    cfg.chains = 2;
    cfg.seed = 99;
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { biortho_sample(BiorthoFamily::Jacobi, 1.0, 2.0, 3, &cfg, &mut b) }, BiorthoStatus::Ok);
    let (mut count, mut n, mut rate) = (0usize, 0usize, 0.0);
    assert_eq!(unsafe { biortho_sample_info(b, &mut count, &mut n, &mut rate) }, BiorthoStatus::Ok);
    assert_eq!((count, n), (200, 3));
    assert!((0.0..=1.0).contains(&rate));
    let mut small = vec![0.0; 10];
    assert_eq!(unsafe { biortho_sample_positions(b, small.as_mut_ptr(), small.len()) }, BiorthoStatus::InvalidArgument);
    let mut all = vec![0.0; count * n];
    assert_eq!(unsafe { biortho_sample_positions(b, all.as_mut_ptr(), all.len()) }, BiorthoStatus::Ok);
    assert!(all.iter().all(|&x| x > 0.0 && x < 1.0));
    unsafe { biortho_sample_free(b) };
    cfg.burn_in = cfg.steps;
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { biortho_sample(BiorthoFamily::Jacobi, 1.0, 2.0, 3, &cfg, &mut b) }, BiorthoStatus::Domain);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/biortho.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    for item in ["typedef struct BiorthoKernel BiorthoKernel;", "BIORTHO_STATUS_OK = 0", "BIORTHO_STATUS_PANIC"] {
        assert!(h.contains(item), "{item}");
    }
}

const C_PROGRAM: &str = r#"
#include "biortho.h"
#include <stdio.h>

int main(void) {
    BiorthoKernel *k = NULL;
    if (biortho_kernel_new(BIORTHO_FAMILY_JACOBI, 0.0, 1.0, 2, &k) != BIORTHO_STATUS_OK) return 10;
    double v = 0.0;
    if (biortho_kernel_eval(k, 0.25, 0.75, &v) != BIORTHO_STATUS_OK) return 11;
    biortho_kernel_free(k);
    if (biortho_kernel_new(BIORTHO_FAMILY_JACOBI, -2.0, 1.0, 2, &k) != BIORTHO_STATUS_DOMAIN) return 12;
    char msg[128];
    biortho_last_error_message(msg, sizeof msg);
    printf("%.17g\n%s\n", v, msg);
    return 0;
}
"#;

// Compiles and links a C client against the generated header and static library.
#[test]
fn c_client_links_and_runs() {
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libbiortho_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("client.c");
    std::fs::write(&c, C_PROGRAM).unwrap();
    let exe = dir.path().join("client");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&c)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    // Shifted Legendre: K_2(x,y) = 1 + 3(2x−1)(2y−1).
    let v: f64 = lines.next().unwrap().parse().unwrap();
    assert!((v - (1.0 - 0.75)).abs() < 1e-12, "{v}");
    assert!(lines.next().unwrap().contains("alpha must be > -1"));
}
