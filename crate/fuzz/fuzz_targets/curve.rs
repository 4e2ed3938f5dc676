#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::report::parse_curve;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_curve(text) {
        assert!(points.windows(2).all(|w| w[1].cumulative >= w[0].cumulative));
        assert!(points.iter().all(|p| (0.0..=1.0 + 1e-9).contains(&p.cumulative)));
    }
});
