#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::story::{parse_question, render_question};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_question(text) {
        assert_eq!(parse_question(&render_question(&q)).expect("rendered questions parse"), q);
    }
});
