#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::PerformanceDataset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = PerformanceDataset::parse(text) {
        let printed = d.to_text();
        assert_eq!(PerformanceDataset::parse(&printed).expect("printed dataset parses").to_text(), printed);
    }
});
