#![no_main]

use libfuzzer_sys::fuzz_target;
use qckit::grid::GridSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = text.parse::<GridSpec>() {
        assert!(g.len() >= 1 && g.len() <= qckit::grid::MAX_GRID_POINTS);
    }
});
