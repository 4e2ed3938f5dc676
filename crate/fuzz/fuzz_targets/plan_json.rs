#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::ExperimentPlan;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(plan) = ExperimentPlan::from_json(text) {
        assert_eq!(ExperimentPlan::from_json(&plan.to_json()).expect("printed plan parses"), plan);
    }
});
