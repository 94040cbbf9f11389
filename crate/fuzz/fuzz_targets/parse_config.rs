#![no_main]

use libfuzzer_sys::fuzz_target;

// The config parser must reject malformed input with a line-numbered error,
// never panic; accepted input must be fully queryable.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = idealsurf::config::parse_config(text) {
            for (k, _) in cfg.iter() {
                let _ = cfg.get_f64(k);
            }
        }
    }
});
