#![no_main]

use annealc::frontends::parse_tree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = parse_tree(text) {
        assert_eq!(parse_tree(&inst.render()).as_ref(), Ok(&inst));
    }
});
