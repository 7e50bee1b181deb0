#![no_main]

use annealc::frontends::parse_dimacs;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cnf) = parse_dimacs(text) {
        assert_eq!(parse_dimacs(&cnf.render()).as_ref(), Ok(&cnf));
    }
});
