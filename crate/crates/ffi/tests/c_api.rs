use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use eckit_ffi::*;

fn fixture(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = eckit_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn automaton(name: &str) -> *mut EckitAutomaton {
    let mut a = ptr::null_mut();
    assert_eq!(eckit_automaton_from_json(fixture(name).as_ptr(), &mut a), EckitStatus::Ok);
    a
}

unsafe fn upword(name: &str) -> *mut EckitUpWord {
    let mut w = ptr::null_mut();
    assert_eq!(eckit_upword_from_json(fixture(name).as_ptr(), &mut w), EckitStatus::Ok);
    w
}

#[test]
fn membership_through_handles() {
    unsafe {
        let a = automaton("ecna.json");
        assert_eq!(eckit_automaton_state_count(a), 3);
        assert_eq!(eckit_automaton_max_constant(a), 3);
        for (name, expected) in [("near_p.json", true), ("far_p.json", false)] {
            let w = upword(name);
            let mut verdict = !expected;
            assert_eq!(eckit_accepts(a, w, &mut verdict), EckitStatus::Ok);
            assert_eq!(verdict, expected, "{name}");
            eckit_upword_free(w);
        }
        eckit_automaton_free(a);
    }
}

#[test]
fn removal_keeps_verdicts_and_serializes() {
    unsafe {
        let a = automaton("ecna.json");
        let mut b = ptr::null_mut();
        assert_eq!(eckit_remove_all_event_clocks(a, &mut b), EckitStatus::Ok);
        assert_eq!(eckit_automaton_clock_count(b), 3);
        let mut c = ptr::null_mut();
        let ya = CString::new("ya").unwrap();
        assert_eq!(eckit_remove_clock(a, ya.as_ptr(), &mut c), EckitStatus::Ok);
        for (name, expected) in [("near_p.json", true), ("far_p.json", false)] {
            let w = upword(name);
            for h in [b, c] {
                let mut verdict = !expected;
                assert_eq!(eckit_accepts(h, w, &mut verdict), EckitStatus::Ok);
                assert_eq!(verdict, expected);
            }
            eckit_upword_free(w);
        }
        let mut json = ptr::null_mut();
        assert_eq!(eckit_automaton_to_json(b, &mut json), EckitStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(eckit_automaton_from_json(json, &mut d), EckitStatus::Ok);
        assert_eq!(eckit_automaton_state_count(d), eckit_automaton_state_count(b));
        eckit_string_free(json);
        for h in [a, b, c, d] {
            eckit_automaton_free(h);
        }
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(eckit_automaton_from_json(fixture("malformed.json").as_ptr(), &mut a), EckitStatus::Format);
        assert!(a.is_null());
        assert!(last_error().contains("line 6"));
        assert_eq!(eckit_automaton_from_json(ptr::null(), &mut a), EckitStatus::NullArgument);
        let a = automaton("ecna.json");
        assert!(eckit_last_error().is_null());
        let nope = CString::new("nope").unwrap();
        let mut b = ptr::null_mut();
        assert_eq!(eckit_remove_clock(a, nope.as_ptr(), &mut b), EckitStatus::Translate);
        assert!(last_error().contains("nope"));
        let mut verdict = false;
        assert_eq!(eckit_accepts(a, ptr::null(), &mut verdict), EckitStatus::NullArgument);
        eckit_automaton_free(a);
        eckit_automaton_free(ptr::null_mut());
        eckit_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/eckit.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "eckit_automaton_from_json",
        "eckit_automaton_to_json",
        "eckit_automaton_free",
        "eckit_upword_from_json",
        "eckit_accepts",
        "eckit_remove_all_event_clocks",
        "eckit_remove_clock",
        "eckit_last_error",
        "eckit_string_free",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f}");
    }
    assert!(text.contains("typedef struct EckitAutomaton EckitAutomaton;"));
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).status() else {
        return;
    };
    assert!(status.success());
}
