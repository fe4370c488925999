#![no_main]

use ipm_core::wire::{parse_measure, MeasureDoc};
use libfuzzer_sys::fuzz_target;

#[path = "common.rs"]
mod common;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let space = common::abc();
    for ctx in [None, Some(&space)] {
        if let Ok(mu) = parse_measure(s, ctx) {
            let json = serde_json::to_string(&MeasureDoc::from_measure(&mu, true)).unwrap();
            assert_eq!(parse_measure(&json, None).unwrap().atoms(), mu.atoms());
        }
    }
});
