//! C ABI over `bkweights`. Modules and inertial descriptions live behind
//! opaque handles; structured results come back as JSON strings owned by the
//! caller and released with [`bk_string_free`]. Every entry point returns a
//! [`BkStatus`]; the message for the last failure on the calling thread is
//! available from [`bk_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bkweights::bkmod::{is_strongly_divisible, weights, BKModule};
use bkweights::inert::{inert_enumerate, inert_member, InertDescription, WeightTuple, DEFAULT_BUDGET};
use bkweights::json::{parse, InertDoc, ModuleDoc};
use bkweights::sdinduced::{extract_module, worked_example};
use bkweights::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BkStatus {
    Ok = 0,
    InvalidInput = 2,
    Precision = 3,
    NullPointer = 4,
    Panic = 5,
}

/// A Breuil-Kisin module.
pub struct BkModule {
    inner: BKModule,
}

/// An inertial description: prime, residue degree and tame summands.
pub struct BkInert {
    inner: InertDescription,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> BkStatus {
    let status = if e.is_precision() { BkStatus::Precision } else { BkStatus::InvalidInput };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> BkStatus) -> BkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            BkStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, BkStatus> {
    if s.is_null() {
        set_error("null string argument".into());
        return Err(BkStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(format!("argument is not UTF-8: {e}"));
        BkStatus::InvalidInput
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> BkStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            BkStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            BkStatus::InvalidInput
        }
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(format!("null pointer: {}", stringify!($p)));
            return BkStatus::NullPointer;
        })+
    };
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
/// Requires: `s` came from this library and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a module document.
/// Requires: `json` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_module_from_json(json: *const c_char, out: *mut *mut BkModule) -> BkStatus {
    guard(|| {
        non_null!(out);
        let text = try_status!(read_str(json));
        match parse::<ModuleDoc>(text).and_then(|d| d.build()) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(BkModule { inner: m }));
                BkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The module spanned by the worked-example submodule for `(p, n, x)`.
/// Requires: `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_worked_example(p: u32, n: i64, x: i64, out: *mut *mut BkModule) -> BkStatus {
    guard(|| {
        non_null!(out);
        match worked_example(p, n, x, None).and_then(|m| extract_module(&m)) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(BkModule { inner: m }));
                BkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Requires: `m` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bk_module_free(m: *mut BkModule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Requires: `m` is a live handle; `rank` and `residue_degree` are writable.
#[no_mangle]
pub unsafe extern "C" fn bk_module_shape(m: *const BkModule, rank: *mut usize, residue_degree: *mut usize) -> BkStatus {
    guard(|| {
        non_null!(m, rank, residue_degree);
        *rank = (*m).inner.rank();
        *residue_degree = (*m).inner.residue_degree();
        BkStatus::Ok
    })
}

/// Weights per embedding as a JSON array of sorted arrays.
/// Requires: `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_module_weights_json(m: *const BkModule, out: *mut *mut c_char) -> BkStatus {
    guard(|| {
        non_null!(m, out);
        match weights(&(*m).inner) {
            Ok(w) => write_string(out, serde_json::to_string(&w.0).expect("serializable")),
            Err(e) => fail(e),
        }
    })
}

/// Requires: `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_module_is_strongly_divisible(m: *const BkModule, out: *mut bool) -> BkStatus {
    guard(|| {
        non_null!(m, out);
        match is_strongly_divisible(&(*m).inner) {
            Ok(r) => {
                *out = r.strongly_divisible;
                BkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serialize a module back to its JSON document.
/// Requires: `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_module_to_json(m: *const BkModule, out: *mut *mut c_char) -> BkStatus {
    guard(|| {
        non_null!(m, out);
        write_string(out, serde_json::to_string(&ModuleDoc::of(&(*m).inner)).expect("serializable"))
    })
}

/// Parse an inertial description document.
/// Requires: `json` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_inert_from_json(json: *const c_char, out: *mut *mut BkInert) -> BkStatus {
    guard(|| {
        non_null!(out);
        let text = try_status!(read_str(json));
        match parse::<InertDoc>(text).and_then(|d| d.build()) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(BkInert { inner: d }));
                BkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Requires: `d` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bk_inert_free(d: *mut BkInert) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Membership of a weight tuple given as JSON, e.g. `[[-1,-1]]`.
/// Requires: `d` is a live handle; `weights_json` is a nul-terminated string; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bk_inert_member(d: *const BkInert, weights_json: *const c_char, out: *mut bool) -> BkStatus {
    guard(|| {
        non_null!(d, out);
        let text = try_status!(read_str(weights_json));
        let lambda = match parse::<Vec<Vec<i64>>>(text) {
            Ok(v) => WeightTuple::new(v),
            Err(e) => return fail(e),
        };
        match inert_member(&(*d).inner, &lambda, None) {
            Ok(w) => {
                *out = w.is_some();
                BkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// All weight tuples with entries in `[lo, hi]`, as a JSON array.
/// Requires: `d` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bk_inert_enumerate_json(d: *const BkInert, lo: i64, hi: i64, out: *mut *mut c_char) -> BkStatus {
    guard(|| {
        non_null!(d, out);
        if lo > hi {
            set_error(format!("empty box [{lo}, {hi}]"));
            return BkStatus::InvalidInput;
        }
        match inert_enumerate(&(*d).inner, lo, hi, DEFAULT_BUDGET) {
            Ok(set) => {
                let tuples: Vec<&Vec<Vec<i64>>> = set.iter().map(|t| &t.0).collect();
                write_string(out, serde_json::to_string(&tuples).expect("serializable"))
            }
            Err(e) => fail(e),
        }
    })
}
