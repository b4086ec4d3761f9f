#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::eval::{extract_answer, extract_thinking, PromptStyle};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for style in [PromptStyle::Rl, PromptStyle::Cot, PromptStyle::Plain] {
        let _ = extract_answer(text, style);
        let _ = extract_thinking(text, style);
    }
});
