#![no_main]

use cavitrap::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut cfg = Config::default();
    for line in text.lines() {
        let _ = cfg.apply_override(line);
    }
    let again = Config::parse(&cfg.to_toml()).expect("emitted config parses");
    assert_eq!(again, cfg);
});
