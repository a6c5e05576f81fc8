#![no_main]

use libfuzzer_sys::fuzz_target;
use qckit::PointMultiset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = PointMultiset::from_json(text) {
        // anything accepted must survive a round trip unchanged
        let again = PointMultiset::from_json(&a.to_json()).expect("round trip");
        assert_eq!(a, again);
    }
});
