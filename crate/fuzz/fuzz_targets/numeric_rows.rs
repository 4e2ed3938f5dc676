#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::benchmark::external::parse_numeric_rows;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_numeric_rows(text) {
        assert!(rows.iter().flatten().all(|v| v.is_finite()));
    }
});
