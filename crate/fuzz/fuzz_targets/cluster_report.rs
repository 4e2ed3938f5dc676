#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::cluster::ClusterReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = ClusterReport::from_json(text) {
        let printed = report.to_json();
        assert_eq!(ClusterReport::from_json(&printed).expect("printed report parses").to_json(), printed);
    }
});
