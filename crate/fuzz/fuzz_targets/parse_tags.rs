#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::reward::{parse_tags, score, ScoreConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for implicit_think in [false, true] {
        let parsed = parse_tags(text, implicit_think);
        if parsed.well_formed {
            assert!(parsed.answer_span.is_some());
        }
    }
    let b = score(text, "box", ScoreConfig::default());
    assert!(matches!(b.total, 3 | -1 | -3));
});
