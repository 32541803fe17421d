#![no_main]

use cavitrap::config::{parse_duration, parse_frequency};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_frequency(text) {
        assert!(v.is_finite());
    }
    if let Ok(v) = parse_duration(text) {
        assert!(v.is_finite());
    }
});
