use std::ffi::{CStr, CString};
use std::fs;
use std::path::PathBuf;
use std::ptr;

use bkweights_ffi::*;

fn fixture(name: &str) -> CString {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    CString::new(fs::read_to_string(p).unwrap()).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    bk_string_free(s);
    out
}

#[test]
fn module_round_trip_and_weights() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(bk_module_from_json(fixture("two_embeddings_sd.json").as_ptr(), &mut m), BkStatus::Ok);
        let (mut rank, mut f) = (0, 0);
        assert_eq!(bk_module_shape(m, &mut rank, &mut f), BkStatus::Ok);
        assert_eq!((rank, f), (2, 2));

        let mut s = ptr::null_mut();
        assert_eq!(bk_module_weights_json(m, &mut s), BkStatus::Ok);
        assert_eq!(take(s), "[[1,3],[0,2]]");

        let mut sd = false;
        assert_eq!(bk_module_is_strongly_divisible(m, &mut sd), BkStatus::Ok);
        assert!(sd);

        assert_eq!(bk_module_to_json(m, &mut s), BkStatus::Ok);
        let text = CString::new(take(s)).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(bk_module_from_json(text.as_ptr(), &mut again), BkStatus::Ok);
        bk_module_free(again);
        bk_module_free(m);
    }
}

#[test]
fn worked_example_handle() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(bk_worked_example(5, 2, 3, &mut m), BkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(bk_module_weights_json(m, &mut s), BkStatus::Ok);
        assert_eq!(take(s), "[[0,1,2,3,5]]");
        bk_module_free(m);

        assert_eq!(bk_worked_example(5, 0, 3, &mut m), BkStatus::InvalidInput);
        assert!(!bk_last_error().is_null());
    }
}

#[test]
fn inert_membership_and_enumeration() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(bk_inert_from_json(fixture("cyclotomic_square.json").as_ptr(), &mut d), BkStatus::Ok);
        let mut member = true;
        let q = CString::new("[[-6,0]]").unwrap();
        assert_eq!(bk_inert_member(d, q.as_ptr(), &mut member), BkStatus::Ok);
        assert!(!member);
        let q = CString::new("[[-1,-1]]").unwrap();
        assert_eq!(bk_inert_member(d, q.as_ptr(), &mut member), BkStatus::Ok);
        assert!(member);
        let q = CString::new("[[1]]").unwrap();
        assert_eq!(bk_inert_member(d, q.as_ptr(), &mut member), BkStatus::InvalidInput);
        bk_inert_free(d);

        assert_eq!(bk_inert_from_json(fixture("trivial_character.json").as_ptr(), &mut d), BkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(bk_inert_enumerate_json(d, 0, 5, &mut s), BkStatus::Ok);
        assert_eq!(take(s), "[[[0]],[[4]]]");
        assert_eq!(bk_inert_enumerate_json(d, 5, 0, &mut s), BkStatus::InvalidInput);
        bk_inert_free(d);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut m = ptr::null_mut();
        let bad = CString::new("{\"p\": 3").unwrap();
        assert_eq!(bk_module_from_json(bad.as_ptr(), &mut m), BkStatus::InvalidInput);
        let msg = CStr::from_ptr(bk_last_error()).to_str().unwrap();
        assert!(msg.contains("JSON"), "{msg}");
        assert_eq!(bk_module_from_json(ptr::null(), &mut m), BkStatus::NullPointer);
        assert_eq!(bk_module_weights_json(ptr::null(), &mut ptr::null_mut()), BkStatus::NullPointer);
        bk_module_free(ptr::null_mut());
        bk_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header: PathBuf = [env!("CARGO_MANIFEST_DIR"), "include", "bkweights.h"].iter().collect();
    let text = fs::read_to_string(header).unwrap();
    for f in [
        "bk_last_error",
        "bk_string_free",
        "bk_module_from_json",
        "bk_worked_example",
        "bk_module_free",
        "bk_module_shape",
        "bk_module_weights_json",
        "bk_module_is_strongly_divisible",
        "bk_module_to_json",
        "bk_inert_from_json",
        "bk_inert_free",
        "bk_inert_member",
        "bk_inert_enumerate_json",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f}");
    }
    assert!(text.contains("typedef struct BkModule BkModule;"));
}
