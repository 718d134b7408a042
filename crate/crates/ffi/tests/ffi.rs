use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use blaschke_ffi::*;

fn handle(json: &str) -> *mut BlaschkeProductHandle {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_product_from_json(text.as_ptr(), &mut out) },
        BlaschkeStatus::Ok
    );
    out
}

fn last_error() -> String {
    let p = blaschke_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn eval(h: *const BlaschkeProductHandle, re: f64, im: f64) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(
        unsafe { blaschke_product_eval(h, re, im, &mut a, &mut b) },
        BlaschkeStatus::Ok
    );
    (a, b)
}

#[test]
fn composition_round_trips_through_factorization() {
    let outer = handle(r#"{"lambda":[0,1],"zeros":[[0.2,0.1],[-0.3,0.4]]}"#);
    let inner = handle(r#"{"lambda":[1,0],"zeros":[[0.5,0],[0,-0.6]]}"#);
    let mut product = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_compose(outer, inner, ptr::null(), &mut product) },
        BlaschkeStatus::Ok
    );
    assert_eq!(unsafe { blaschke_product_degree(product) }, 4);

    let opts = blaschke_options_default();
    let mut list = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_factorize(product, &opts, &mut list) },
        BlaschkeStatus::Ok
    );
    let count = unsafe { blaschke_factorizations_count(list) };
    assert!(count >= 1);
    for k in 0..count {
        let (mut o, mut i, mut r) = (ptr::null_mut(), ptr::null_mut(), f64::NAN);
        assert_eq!(
            unsafe { blaschke_factorization_get(list, k, &mut o, &mut i, &mut r) },
            BlaschkeStatus::Ok
        );
        assert!(r <= opts.residual);
        for (re, im) in [(0.1, 0.2), (-0.5, 0.3), (0.7, -0.1)] {
            let (ir, ii) = eval(i, re, im);
            let composed = eval(o, ir, ii);
            let direct = eval(product, re, im);
            assert!((composed.0 - direct.0).hypot(composed.1 - direct.1) <= 1e-9);
        }
        unsafe {
            blaschke_product_free(o);
            blaschke_product_free(i);
        }
    }
    unsafe {
        blaschke_factorizations_free(list);
        blaschke_product_free(product);
        blaschke_product_free(outer);
        blaschke_product_free(inner);
    }
}

#[test]
fn product_data_matches_construction() {
    let zeros = [0.1, 0.2, -0.3, 0.0];
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_product_new(0.0, -1.0, zeros.as_ptr(), 2, &mut h) },
        BlaschkeStatus::Ok
    );
    let mut lambda = [0.0; 2];
    let mut out = [0.0; 4];
    assert_eq!(
        unsafe { blaschke_product_data(h, lambda.as_mut_ptr(), out.as_mut_ptr()) },
        BlaschkeStatus::Ok
    );
    assert_eq!(lambda, [0.0, -1.0]);
    assert_eq!(out, zeros);
    unsafe { blaschke_product_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = ptr::null_mut();
    let zeros = [1.5, 0.0];
    assert_eq!(
        unsafe { blaschke_product_new(1.0, 0.0, zeros.as_ptr(), 1, &mut out) },
        BlaschkeStatus::InvalidInput
    );
    assert!(out.is_null());
    assert!(last_error().contains("zeros[0]"));

    let bad = CString::new("not json").unwrap();
    assert_eq!(
        unsafe { blaschke_product_from_json(bad.as_ptr(), &mut out) },
        BlaschkeStatus::InvalidInput
    );
    assert_eq!(
        unsafe { blaschke_product_from_json(ptr::null(), &mut out) },
        BlaschkeStatus::NullPointer
    );

    let mut big = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_product_random(17, 1, 0.8, &mut big) },
        BlaschkeStatus::Ok
    );
    let mut list = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_factorize(big, ptr::null(), &mut list) },
        BlaschkeStatus::Declined
    );
    assert!(list.is_null());

    let opts = BlaschkeOptions {
        grid: 0,
        ..blaschke_options_default()
    };
    assert_eq!(
        unsafe { blaschke_factorize(big, &opts, &mut list) },
        BlaschkeStatus::InvalidInput
    );
    unsafe { blaschke_product_free(big) };

    assert_eq!(unsafe { blaschke_product_degree(ptr::null()) }, 0);
    unsafe { blaschke_product_free(ptr::null_mut()) };
}

#[test]
fn analysis_json_parses() {
    let h = handle(r#"{"lambda":[1,0],"zeros":[[0,0],[0,0],[0,0],[0,0]]}"#);
    let mut text = ptr::null_mut();
    assert_eq!(
        unsafe { blaschke_analyze_json(h, ptr::null(), false, &mut text) },
        BlaschkeStatus::Ok
    );
    let report = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_string();
    assert!(report.starts_with('{') && report.contains("\"block_systems\""));
    unsafe {
        blaschke_string_free(text);
        blaschke_product_free(h);
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/blaschke.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("BLASCHKE_STATUS_DECLINED = 3"));
    assert!(header.contains("typedef struct BlaschkeProductHandle BlaschkeProductHandle;"));
}

/// `target/<profile>`, two levels above this test executable.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = profile_dir().join("libblaschke_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let exe = out_dir.join("blaschke_smoke");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
