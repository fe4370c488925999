#![no_main]

use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = ipm_core::wire::parse_retraction(s, &common::abc()) {
        assert!(r.is_retraction());
    }
});
