#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::FunctionId;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = text.parse::<FunctionId>() {
        assert_eq!(f.to_string().parse::<FunctionId>().unwrap(), f);
    }
});
