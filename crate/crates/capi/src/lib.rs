//! C ABI for the evistate engine.
//!
//! Scenarios are parsed into opaque handles; runs, audits and comparisons
//! return JSON report strings (the same bytes the CLI emits with
//! `--format json`). Every function returns a status code:
//!
//! - `EVISTATE_OK` (0): success;
//! - `EVISTATE_ERR_ARG` (1): null pointer or invalid UTF-8;
//! - `EVISTATE_ERR_INPUT` (2): parse or validation failure, unknown
//!   builtin or pipeline label;
//! - `EVISTATE_ERR_ENGINE` (3): enumeration overflow, empty admissible
//!   set, or another engine failure.
//!
//! On any non-zero return, [`evistate_last_error_message`] yields a
//! human-readable description for the calling thread. Strings returned by
//! this library must be released with [`evistate_string_free`]; handles
//! with [`evistate_scenario_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, c_int};

use evistate::report::{audit_scenario, compare_scenario, run_scenario, to_json};
use evistate::scenario::{parse_scenario, render_scenario, Scenario};

pub const EVISTATE_OK: c_int = 0;
pub const EVISTATE_ERR_ARG: c_int = 1;
pub const EVISTATE_ERR_INPUT: c_int = 2;
pub const EVISTATE_ERR_ENGINE: c_int = 3;

/// Opaque scenario handle; create with `evistate_scenario_parse`, release
/// with `evistate_scenario_free`.
#[repr(C)]
pub struct EvistateScenario {
    _private: [u8; 0],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let message = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn handle_of(scenario: Scenario) -> *mut EvistateScenario {
    Box::into_raw(Box::new(scenario)) as *mut EvistateScenario
}

/// # Safety
/// `handle` must come from `evistate_scenario_parse` and be unfreed.
unsafe fn scenario_of<'a>(handle: *const EvistateScenario) -> &'a Scenario {
    &*(handle as *const Scenario)
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(EVISTATE_ERR_ARG);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        EVISTATE_ERR_ARG
    })
}

fn write_string(out: *mut *mut c_char, value: String) -> c_int {
    if out.is_null() {
        set_error("null output pointer");
        return EVISTATE_ERR_ARG;
    }
    match CString::new(value) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            EVISTATE_OK
        }
        Err(_) => {
            set_error("output contains interior NUL");
            EVISTATE_ERR_ENGINE
        }
    }
}

fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            EVISTATE_ERR_ENGINE
        }
    }
}

/// Version of the underlying engine as a static string; do not free.
#[no_mangle]
pub extern "C" fn evistate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message; null when none. Free
/// with `evistate_string_free`.
#[no_mangle]
pub extern "C" fn evistate_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|m| m.clone().into_raw())
            .unwrap_or(std::ptr::null_mut())
    })
}

/// Parses and validates scenario text into an opaque handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn evistate_scenario_parse(
    text: *const c_char,
    out: *mut *mut EvistateScenario,
) -> c_int {
    guarded(|| {
        let text = match read_str(text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        if out.is_null() {
            set_error("null output pointer");
            return EVISTATE_ERR_ARG;
        }
        match parse_scenario(text) {
            Ok(scenario) => {
                *out = handle_of(scenario);
                EVISTATE_OK
            }
            Err(e) => {
                set_error(e.to_string());
                EVISTATE_ERR_INPUT
            }
        }
    })
}

/// Releases a scenario handle; null is ignored.
///
/// # Safety
/// `handle` must come from `evistate_scenario_parse` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn evistate_scenario_free(handle: *mut EvistateScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle as *mut Scenario));
    }
}

/// Renders a scenario in canonical text form.
///
/// # Safety
/// `handle` must be a live scenario handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn evistate_scenario_render(
    handle: *const EvistateScenario,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        if handle.is_null() {
            set_error("null scenario handle");
            return EVISTATE_ERR_ARG;
        }
        write_string(out, render_scenario(scenario_of(handle)))
    })
}

/// Copies a builtin scenario's text; names: fig1, s2, trial, independent.
///
/// # Safety
/// `name` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn evistate_builtin_text(
    name: *const c_char,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        let name = match read_str(name) {
            Ok(n) => n,
            Err(code) => return code,
        };
        match evistate::builtin::text(name) {
            Some(text) => write_string(out, text.to_string()),
            None => {
                set_error(format!("unknown builtin `{name}`"));
                EVISTATE_ERR_INPUT
            }
        }
    })
}

/// Runs every pipeline and metric of a scenario; writes the JSON report.
///
/// # Safety
/// `handle` must be a live scenario handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn evistate_run_json(
    handle: *const EvistateScenario,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        if handle.is_null() {
            set_error("null scenario handle");
            return EVISTATE_ERR_ARG;
        }
        match run_scenario(scenario_of(handle)) {
            Ok(report) => write_string(out, to_json(&report)),
            Err(e) => {
                set_error(e.to_string());
                EVISTATE_ERR_ENGINE
            }
        }
    })
}

/// Audits the causal-breadth constraint per pipeline; writes the JSON
/// report.
///
/// # Safety
/// `handle` must be a live scenario handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn evistate_audit_json(
    handle: *const EvistateScenario,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        if handle.is_null() {
            set_error("null scenario handle");
            return EVISTATE_ERR_ARG;
        }
        match audit_scenario(scenario_of(handle)) {
            Ok(report) => write_string(out, to_json(&report)),
            Err(e) => {
                set_error(e.to_string());
                EVISTATE_ERR_ENGINE
            }
        }
    })
}

/// Compares two pipeline orders by label; writes the JSON comparison.
///
/// # Safety
/// `handle` must be a live scenario handle; `a`, `b` NUL-terminated; `out`
/// valid.
#[no_mangle]
pub unsafe extern "C" fn evistate_compare_json(
    handle: *const EvistateScenario,
    a: *const c_char,
    b: *const c_char,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        if handle.is_null() {
            set_error("null scenario handle");
            return EVISTATE_ERR_ARG;
        }
        let (a, b) = match (read_str(a), read_str(b)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        let scenario = scenario_of(handle);
        if scenario.pipeline(a).is_none() || scenario.pipeline(b).is_none() {
            set_error(format!("unknown pipeline label `{a}` or `{b}`"));
            return EVISTATE_ERR_INPUT;
        }
        match compare_scenario(scenario, a, b) {
            Ok(report) => write_string(out, to_json(&report)),
            Err(e) => {
                set_error(e.to_string());
                EVISTATE_ERR_ENGINE
            }
        }
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `ptr` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn evistate_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}
