#![no_main]

use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let space = common::abc();
    for ctx in [None, Some(&space)] {
        let _ = ipm_core::wire::parse_neighborhood(s, ctx);
    }
});
