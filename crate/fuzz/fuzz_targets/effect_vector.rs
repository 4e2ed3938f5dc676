#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::EffectVector;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ev) = EffectVector::parse(text) {
        let printed = ev.to_text();
        assert_eq!(EffectVector::parse(&printed).expect("printed vector parses").to_text(), printed);
    }
});
