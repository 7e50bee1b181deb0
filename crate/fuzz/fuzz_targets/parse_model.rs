#![no_main]

use annealc::qubo_ising::{parse_model, ModelFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_model(text) {
        let rendered = match &m {
            ModelFile::Qubo(q) => q.render(),
            ModelFile::Ising(i) => i.render(),
        };
        assert_eq!(parse_model(&rendered).as_ref(), Ok(&m));
    }
});
