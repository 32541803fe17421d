//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so the seeds stay meaningful under plain `cargo test`.

use std::fs;
use std::path::PathBuf;

use cavitrap::config::{parse_duration, parse_frequency, Config};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("parse_config") {
        match Config::parse(&text) {
            Ok(cfg) => {
                assert_eq!(Config::parse(&cfg.to_toml()).unwrap(), cfg, "{name}");
                parsed += 1;
            }
            Err(e) => assert!(name.starts_with("broken"), "{name}: {e}"),
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn quantity_seeds() {
    for (name, text) in seeds("parse_quantity") {
        let f = parse_frequency(&text);
        let d = parse_duration(&text);
        if name == "overflow" {
            assert!(f.is_err() && d.is_err());
            continue;
        }
        assert!(f.is_ok() != d.is_ok(), "{name}: exactly one parser should accept `{text}`");
        assert!(f.map_or(true, f64::is_finite) && d.map_or(true, f64::is_finite));
    }
}

#[test]
fn override_seeds() {
    for (name, text) in seeds("apply_override") {
        let mut cfg = Config::default();
        let results: Vec<bool> = text.lines().map(|l| cfg.apply_override(l).is_ok()).collect();
        match name.as_str() {
            "bad" => assert!(results.iter().all(|ok| !ok), "{results:?}"),
            _ => assert!(results.iter().all(|ok| *ok), "{name}: {results:?}"),
        }
        assert_eq!(Config::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
