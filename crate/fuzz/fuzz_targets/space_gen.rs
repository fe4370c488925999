#![no_main]

use ipm_core::harness::generate::{generate_space, SpaceGen};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = s.parse::<SpaceGen>() {
        assert_eq!(spec.to_string().parse::<SpaceGen>().unwrap(), spec);
        // Skip huge generators; they are valid but slow.
        if matches!(spec, SpaceGen::Grid1d(n) | SpaceGen::Circle(n) | SpaceGen::RandomPoints { n, .. } if n <= 64)
            && !matches!(spec, SpaceGen::RandomPoints { dim, .. } if dim > 8)
        {
            let _ = generate_space(&spec);
        }
    }
});
