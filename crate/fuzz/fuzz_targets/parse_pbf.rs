#![no_main]

use annealc::parse_pbf;
use libfuzzer_sys::fuzz_target;

// Anything that parses must survive a render/parse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_pbf(text) {
        let again = parse_pbf(&f.render()).expect("rendered polynomial reparses");
        assert_eq!(f, again);
    }
});
