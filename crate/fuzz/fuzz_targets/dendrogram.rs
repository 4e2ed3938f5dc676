#![no_main]

use libfuzzer_sys::fuzz_target;
use modpso::cluster::Dendrogram;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tree) = Dendrogram::parse(text) {
        let printed = tree.to_text();
        assert_eq!(Dendrogram::parse(&printed).expect("printed tree parses").to_text(), printed);
        let _ = tree.leaf_order();
        for k in 1..=tree.n_leaves().min(8) {
            let _ = tree.cut_k(k);
        }
    }
});
