#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::ProblemInstance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ProblemInstance::from_json(text) {
        let x = vec![0.0; p.dimension()];
        let _ = p.evaluate_clean(&x);
        let again = ProblemInstance::from_json(&p.to_json()).expect("printed instance parses");
        assert_eq!(again.to_json(), p.to_json());
    }
});
