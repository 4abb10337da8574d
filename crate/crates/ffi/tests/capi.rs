use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use weightlab_ffi::*;

fn last_error() -> String {
    let p = wl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn weights_evaluate_through_handles() {
    let mut w: *mut WlWeight = ptr::null_mut();
    unsafe {
        assert_eq!(wl_weight_theorem(2.0, 1, 1, &mut w), WlStatus::Ok);
        assert_eq!(wl_weight_dim(w), 1);
        let mut v = 0.0;
        let x = [0.5f64];
        assert_eq!(wl_weight_eval(w, x.as_ptr(), 1, &mut v), WlStatus::Ok);
        let expected = 1.0 / (0.5 * (1.0 + 2f64.ln()).powi(2));
        assert!((v - expected).abs() < 1e-12 * expected);
        assert!(wl_last_error_message().is_null());

        let origin = [0.0f64];
        assert_eq!(wl_weight_eval(w, origin.as_ptr(), 1, &mut v), WlStatus::InvalidArgument);
        assert!(last_error().contains("origin"));
        let two = [0.5f64, 0.5];
        assert_eq!(wl_weight_eval(w, two.as_ptr(), 2, &mut v), WlStatus::InvalidArgument);
        wl_weight_free(w);
    }
}

#[test]
fn invalid_arguments_report_codes() {
    let mut w: *mut WlWeight = ptr::null_mut();
    unsafe {
        assert_eq!(wl_weight_theorem(2.0, 1, 7, &mut w), WlStatus::InvalidArgument);
        assert!(w.is_null());
        assert_eq!(wl_weight_power_log(1.5, 0.0, 1, &mut w), WlStatus::InvalidArgument);
        assert_eq!(wl_weight_constant(1, 1.0, ptr::null_mut()), WlStatus::NullPointer);
        assert_eq!(wl_weight_eval(ptr::null(), ptr::null(), 0, ptr::null_mut()), WlStatus::NullPointer);
        assert_eq!(wl_weight_dim(ptr::null()), 0);
        wl_weight_free(ptr::null_mut());
        wl_space_free(ptr::null_mut());
        wl_string_free(ptr::null_mut());
    }
}

#[test]
fn spaces_parse_and_compute_norms() {
    let desc = CString::new("orlicz:pprime=3,gamma=2.5").unwrap();
    let mut x: *mut WlSpace = ptr::null_mut();
    let mut xp: *mut WlSpace = ptr::null_mut();
    let mut one: *mut WlWeight = ptr::null_mut();
    unsafe {
        assert_eq!(wl_space_parse(desc.as_ptr(), &mut x), WlStatus::Ok);
        let s = wl_space_descriptor(x);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "orlicz:pprime=3,gamma=2.5");
        wl_string_free(s);
        assert_eq!(wl_space_associate(x, &mut xp), WlStatus::Ok);
        let s = wl_space_descriptor(xp);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "orlicz-conjugate:pprime=3,gamma=2.5");
        wl_string_free(s);

        assert_eq!(wl_weight_constant(1, 1.0, &mut one), WlStatus::Ok);
        let (mut v, mut div) = (0.0, 9u8);
        assert_eq!(wl_norm_on_origin_cube(x, one, 1.0, 0.5, 0.0, &mut v, &mut div), WlStatus::Ok);
        assert!((v - 1.0).abs() < 1e-8);
        assert_eq!(div, 0);
        assert_eq!(wl_norm_on_origin_cube(x, one, 1.0, 0.5, -1.0, &mut v, &mut div), WlStatus::InvalidArgument);

        let l2 = CString::new("lebesgue:r=2").unwrap();
        let mut y: *mut WlSpace = ptr::null_mut();
        assert_eq!(wl_space_parse(l2.as_ptr(), &mut y), WlStatus::Ok);
        let a = 2f64.powi(-10);
        assert_eq!(wl_annulus_norm(y, a, 2.0, 1, &mut v), WlStatus::Ok);
        assert!((v - (2.0 * 2048f64.ln()).sqrt()).abs() < 1e-6);

        let bad = CString::new("lebesgue:q=2").unwrap();
        let mut z: *mut WlSpace = ptr::null_mut();
        assert_eq!(wl_space_parse(bad.as_ptr(), &mut z), WlStatus::Parse);
        assert!(!last_error().is_empty());

        wl_weight_free(one);
        wl_space_free(x);
        wl_space_free(xp);
        wl_space_free(y);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/weightlab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "wl_last_error_message",
        "wl_weight_theorem",
        "wl_weight_eval",
        "wl_space_parse",
        "wl_norm_on_origin_cube",
        "wl_annulus_norm",
        "typedef struct WlWeight WlWeight",
        "WL_STATUS_NULL_POINTER = 1",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

fn static_lib() -> Option<PathBuf> {
    // tests/<exe> lives in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libweightlab_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_the_static_library() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found, skipping");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::temp_dir().join(format!("weightlab_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
