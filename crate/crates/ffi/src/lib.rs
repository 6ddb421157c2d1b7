//! C ABI over `eckit`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Every fallible call returns an
//! [`EckitStatus`] and leaves a message for [`eckit_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eckit::engine::accepts;
use eckit::format::{automaton_from_json, automaton_to_json, rebase_upword, upword_from_json};
use eckit::model::Automaton;
use eckit::translate::{remove_all_event_clocks, remove_clock_named, TranslateOptions};
use eckit::words::UpWord;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EckitStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Format = 3,
    Translate = 4,
    Engine = 5,
    Panic = 6,
}

/// An automaton.
pub struct EckitAutomaton(Automaton);

/// An ultimately periodic word with its proposition names.
pub struct EckitUpWord {
    word: UpWord,
    props: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: EckitStatus, msg: impl ToString) -> EckitStatus {
    set_error(&msg.to_string());
    status
}

fn guarded(f: impl FnOnce() -> EckitStatus) -> EckitStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(EckitStatus::Panic, "internal panic"))
}

// SAFETY: caller passes NULL or a NUL-terminated string
unsafe fn as_str<'a>(s: *const c_char) -> Result<&'a str, EckitStatus> {
    if s.is_null() {
        return Err(fail(EckitStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(EckitStatus::InvalidUtf8, e))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn eckit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an automaton document.
///
/// # Safety
/// `json` is NULL or NUL-terminated; `out` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eckit_automaton_from_json(
    json: *const c_char,
    out: *mut *mut EckitAutomaton,
) -> EckitStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EckitStatus::NullArgument, "null output pointer");
        }
        let text = match as_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match automaton_from_json(text) {
            Ok(a) => {
                *out = Box::into_raw(Box::new(EckitAutomaton(a)));
                EckitStatus::Ok
            }
            Err(e) => fail(EckitStatus::Format, e),
        }
    })
}

/// Serializes an automaton; free the result with [`eckit_string_free`].
///
/// # Safety
/// `a` is NULL or a live handle; `out` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eckit_automaton_to_json(
    a: *const EckitAutomaton,
    out: *mut *mut c_char,
) -> EckitStatus {
    guarded(|| {
        if a.is_null() || out.is_null() {
            return fail(EckitStatus::NullArgument, "null argument");
        }
        *out = into_c_string(automaton_to_json(&(*a).0));
        EckitStatus::Ok
    })
}

/// Number of control states.
///
/// # Safety
/// `a` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eckit_automaton_state_count(a: *const EckitAutomaton) -> usize {
    a.as_ref().map_or(0, |a| a.0.states.len())
}

/// Number of clocks, normal and event.
///
/// # Safety
/// `a` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eckit_automaton_clock_count(a: *const EckitAutomaton) -> usize {
    a.as_ref().map_or(0, |a| a.0.clocks.len())
}

/// Largest constant in any guard.
///
/// # Safety
/// `a` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eckit_automaton_max_constant(a: *const EckitAutomaton) -> u32 {
    a.as_ref().map_or(0, |a| a.0.max_constant())
}

/// # Safety
/// `a` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eckit_automaton_free(a: *mut EckitAutomaton) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Parses an `upword` document.
///
/// # Safety
/// `json` is NULL or NUL-terminated; `out` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eckit_upword_from_json(
    json: *const c_char,
    out: *mut *mut EckitUpWord,
) -> EckitStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EckitStatus::NullArgument, "null output pointer");
        }
        let text = match as_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match upword_from_json(text) {
            Ok((word, props)) => {
                *out = Box::into_raw(Box::new(EckitUpWord { word, props }));
                EckitStatus::Ok
            }
            Err(e) => fail(EckitStatus::Format, e),
        }
    })
}

/// # Safety
/// `w` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eckit_upword_free(w: *mut EckitUpWord) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Decides acceptance; writes the verdict to `out`.
///
/// # Safety
/// `a` and `w` are NULL or live handles; `out` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eckit_accepts(
    a: *const EckitAutomaton,
    w: *const EckitUpWord,
    out: *mut bool,
) -> EckitStatus {
    guarded(|| {
        let (Some(a), Some(w)) = (a.as_ref(), w.as_ref()) else {
            return fail(EckitStatus::NullArgument, "null argument");
        };
        if out.is_null() {
            return fail(EckitStatus::NullArgument, "null output pointer");
        }
        let word = match rebase_upword(&w.word, &w.props, &a.0.props) {
            Ok(word) => word,
            Err(e) => return fail(EckitStatus::Format, e),
        };
        match accepts(&a.0, &word) {
            Ok(v) => {
                *out = v;
                EckitStatus::Ok
            }
            Err(e) => fail(EckitStatus::Engine, e),
        }
    })
}

/// Removes every event clock into a new handle.
///
/// # Safety
/// `a` is NULL or a live handle; `out` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eckit_remove_all_event_clocks(
    a: *const EckitAutomaton,
    out: *mut *mut EckitAutomaton,
) -> EckitStatus {
    guarded(|| {
        let Some(a) = a.as_ref() else {
            return fail(EckitStatus::NullArgument, "null argument");
        };
        if out.is_null() {
            return fail(EckitStatus::NullArgument, "null output pointer");
        }
        match remove_all_event_clocks(&a.0, TranslateOptions::default()) {
            Ok((b, _)) => {
                *out = Box::into_raw(Box::new(EckitAutomaton(b)));
                EckitStatus::Ok
            }
            Err(e) => fail(EckitStatus::Translate, e),
        }
    })
}

/// Removes the event clock named `clock` into a new handle.
///
/// # Safety
/// `a` is NULL or a live handle; `clock` is NULL or NUL-terminated; `out`
/// is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eckit_remove_clock(
    a: *const EckitAutomaton,
    clock: *const c_char,
    out: *mut *mut EckitAutomaton,
) -> EckitStatus {
    guarded(|| {
        let Some(a) = a.as_ref() else {
            return fail(EckitStatus::NullArgument, "null argument");
        };
        if out.is_null() {
            return fail(EckitStatus::NullArgument, "null output pointer");
        }
        let name = match as_str(clock) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match remove_clock_named(&a.0, name, TranslateOptions::default()) {
            Ok((b, _)) => {
                *out = Box::into_raw(Box::new(EckitAutomaton(b)));
                EckitStatus::Ok
            }
            Err(e) => fail(EckitStatus::Translate, e),
        }
    })
}

/// # Safety
/// `s` is NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eckit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
