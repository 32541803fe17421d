#![no_main]

use cavitrap::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = Config::parse(text) {
        // whatever parses must survive a round trip
        let again = Config::parse(&cfg.to_toml()).expect("emitted config parses");
        assert_eq!(again, cfg);
    }
});
