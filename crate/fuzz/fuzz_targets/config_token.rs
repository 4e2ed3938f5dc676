#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::swarm::ModuleConfiguration;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = text.parse::<ModuleConfiguration>() {
        let again: ModuleConfiguration = config.to_string().parse().expect("printed token parses");
        assert_eq!(again, config);
    }
});
