#![no_main]

use libfuzzer_sys::fuzz_target;
use qckit::generators::GeneratorSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // parsing only: generating from an arbitrary window may legitimately
    // allocate up to the expanded-length cap
    let _ = GeneratorSpec::from_json(text);
});
