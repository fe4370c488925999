#![no_main]

use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = ipm_core::wire::parse_witness(s, &common::abc(), &common::abc()) {
        assert!(w.max_displacement() <= w.step_bound());
        let _ = ipm_core::verify_collapse(&w);
    }
});
