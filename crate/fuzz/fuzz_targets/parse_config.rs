#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = inclusion_forge::io::parse_config(text) {
        let _ = cfg.to_problem();
        let _ = cfg.expected_verdict();
    }
});
