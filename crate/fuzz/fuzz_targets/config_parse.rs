#![no_main]

use covariant_bohm::config::{parse_document, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = parse_document(text) {
        if let Ok(cfg) = RunConfig::from_document(&doc) {
            // The echo of a valid configuration must parse back to the same values.
            let mut again = String::new();
            let mut section = "";
            let echo = cfg.echo();
            for line in &echo {
                let (key, value) = line.split_once(" = ").unwrap();
                let (s, k) = key.split_once('.').unwrap();
                if s != section {
                    again.push_str(&format!("[{s}]\n"));
                    section = s;
                }
                again.push_str(&format!("{k} = {value}\n"));
            }
            let back = RunConfig::parse(&again).expect("echo must parse");
            assert_eq!(back.model, cfg.model);
            assert_eq!(back.initial, cfg.initial);
            assert_eq!(back.boost, cfg.boost);
        }
    }
});
