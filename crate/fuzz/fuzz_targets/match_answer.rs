#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::reward::{match_answer, normalize};

fuzz_target!(|input: (&str, &str)| {
    let (answer, truth) = input;
    let _ = match_answer(answer, truth);
    let n = normalize(truth);
    if !n.is_empty() {
        assert_eq!(match_answer(&n, truth), Ok(true));
    }
});
