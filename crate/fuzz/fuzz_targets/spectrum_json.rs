#![no_main]

use libfuzzer_sys::fuzz_target;
use qckit::Spectrum;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = Spectrum::from_json(text) {
        let again = Spectrum::from_json(&s.to_json()).expect("round trip");
        assert_eq!(s, again);
        let _ = s.mass_law();
    }
});
