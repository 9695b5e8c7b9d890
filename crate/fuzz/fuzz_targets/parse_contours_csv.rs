#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = inclusion_forge::io::parse_contours_csv(text) {
        let _ = inclusion_forge::io::polylines(&rows);
    }
});
