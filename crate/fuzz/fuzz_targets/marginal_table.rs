#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::fanova::MarginalTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = MarginalTable::parse(text) {
        let printed = t.to_text();
        assert_eq!(MarginalTable::parse(&printed).expect("printed table parses").to_text(), printed);
    }
});
