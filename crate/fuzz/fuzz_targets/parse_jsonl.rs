#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::eval::{parse_jsonl, to_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_jsonl(text) {
        assert_eq!(parse_jsonl(&to_jsonl(&rows)).expect("written rows parse"), rows);
    }
});
