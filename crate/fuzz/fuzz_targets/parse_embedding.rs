#![no_main]

use annealc::chimera::parse_embedding;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse_embedding(text) {
        assert_eq!(parse_embedding(&e.render()).as_ref(), Ok(&e));
    }
});
