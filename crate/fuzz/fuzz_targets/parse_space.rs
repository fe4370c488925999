#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(space) = ipm_core::wire::parse_space(s) {
            let doc = ipm_core::wire::SpaceDoc::from_space(&space);
            assert!(doc.to_space().is_ok());
        }
    }
});
