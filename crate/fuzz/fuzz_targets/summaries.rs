#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::report::{parse_summaries, summaries_to_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_summaries(text) {
        let printed = summaries_to_text(&rows);
        assert_eq!(summaries_to_text(&parse_summaries(&printed).expect("printed summaries parse")), printed);
    }
});
