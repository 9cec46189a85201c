use std::ffi::{CStr, CString};
use std::ptr;

use rounded_reach_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { rr_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rr_last_error_message()) }.to_str().unwrap().to_owned()
}

const DOUBLING: &str = r#"{"version":1,"system":{"kind":"jnf","blocks":[{"size":1,"modulus":"2","angle":"0 pi"}]},
"rounding":{"shape":"argand","kind":"floor","g":"1"},"initial":["3"],"target":["12"]}"#;

#[test]
fn parse_decide_simulate() {
    let json = CString::new(DOUBLING).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { rr_instance_parse(json.as_ptr(), &mut inst) }, RrStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rr_decide(inst, &mut out) }, RrStatus::Ok);
    let v = take(out);
    assert!(v.contains(r#""verdict":"reached""#) && v.contains(r#""step":2"#), "{v}");
    assert_eq!(unsafe { rr_simulate(inst, 5, &mut out) }, RrStatus::Ok);
    assert_eq!(take(out), r#"{"hit":2,"states":[["3"],["6"],["12"]]}"#);
    unsafe { rr_instance_free(inst) };
}

#[test]
fn undecided_and_errors() {
    let rot = DOUBLING.replace(r#""2","angle":"0 pi""#, r#""1","angle":"1/2 pi""#).replace("floor", "minimal-error-up");
    let json = CString::new(rot).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { rr_instance_parse(json.as_ptr(), &mut inst) }, RrStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rr_decide(inst, &mut out) }, RrStatus::Undecided);
    assert!(take(out).contains("undecided-by-this-tool"));
    unsafe { rr_instance_free(inst) };

    let bad = CString::new("{\"version\":1}").unwrap();
    assert_eq!(unsafe { rr_instance_parse(bad.as_ptr(), &mut inst) }, RrStatus::Parse);
    assert!(inst.is_null());
    assert!(last_error().contains("parse error"));
    assert_eq!(unsafe { rr_instance_parse(ptr::null(), &mut inst) }, RrStatus::NullArgument);
    assert_eq!(unsafe { rr_decide(ptr::null(), &mut out) }, RrStatus::NullArgument);
    unsafe { rr_instance_free(ptr::null_mut()) };
    unsafe { rr_string_free(ptr::null_mut()) };
}

#[test]
fn compile_and_perturb() {
    let phi = CString::new("forall x1 exists x2 : (x1 | x2)").unwrap();
    let fam = CString::new("floor").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rr_compile_qbf(phi.as_ptr(), fam.as_ptr(), ptr::null(), &mut out) }, RrStatus::Ok);
    let doc = take(out);
    assert!(doc.contains("\"dimension\": 192"));
    let three = CString::new("3").unwrap();
    assert_eq!(unsafe { rr_compile_qbf(phi.as_ptr(), fam.as_ptr(), three.as_ptr(), &mut out) }, RrStatus::GadgetBroken);
    assert!(out.is_null());
    let eleven = CString::new("11/10").unwrap();
    assert_eq!(unsafe { rr_compile_qbf(phi.as_ptr(), fam.as_ptr(), eleven.as_ptr(), &mut out) }, RrStatus::Ok);
    let doc = take(out);
    let c = CString::new(doc).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { rr_instance_parse(c.as_ptr(), &mut inst) }, RrStatus::Ok);
    // a true formula reaches the target within (2^n + 1) * m = 40 steps
    assert_eq!(unsafe { rr_simulate(inst, 40, &mut out) }, RrStatus::Ok);
    assert!(!take(out).starts_with("{\"hit\":null"));
    unsafe { rr_instance_free(inst) };
}

#[test]
fn rotate_grid() {
    let th = CString::new("1/2 pi").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rr_rotate(1, th.as_ptr(), 100, &mut out) }, RrStatus::Ok);
    assert_eq!(take(out), "x,y,first_generation\n-1,0,0\n0,-1,0\n0,0,0\n0,1,0\n1,0,0\n");
    let bad = CString::new("pi^").unwrap();
    assert_eq!(unsafe { rr_rotate(1, bad.as_ptr(), 100, &mut out) }, RrStatus::Parse);
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rounded_reach.h")).unwrap();
    for f in [
        "rr_instance_parse",
        "rr_instance_free",
        "rr_decide",
        "rr_simulate",
        "rr_compile_qbf",
        "rr_rotate",
        "rr_string_free",
        "rr_last_error_message",
        "typedef struct RrInstance RrInstance",
    ] {
        assert!(h.contains(f), "{f} missing from header");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let target = std::env::var("CARGO_TARGET_DIR").map(std::path::PathBuf::from).unwrap_or_else(|_| root.join("../../target"));
    let lib = target.join(profile).join("librounded_reach_ffi.a");
    let cc = std::process::Command::new("cc").arg("--version").output();
    if !lib.exists() && profile == "debug" {
        let _ = std::process::Command::new(env!("CARGO"))
            .args(["build", "--quiet", "-p", "rounded-reach-ffi", "--lib"])
            .current_dir(root)
            .status();
    }
    if !lib.exists() || cc.is_err() {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(root.join("tests/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x,y,first_generation\n-1,0,0\n0,-1,0\n0,0,0\n0,1,0\n1,0,0\n");
}
