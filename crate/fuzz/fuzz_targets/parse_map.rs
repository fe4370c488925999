#![no_main]

use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = ipm_core::wire::parse_map(s, &common::abc(), &common::pq());
    let _ = ipm_core::wire::parse_map(s, &common::abc(), &common::abc());
});
