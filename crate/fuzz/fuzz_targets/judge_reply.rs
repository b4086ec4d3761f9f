#![no_main]

use futures::executor::block_on;
use libfuzzer_sys::fuzz_target;
use tomforge_core::client::{ChatRequest, ChatResponse, FnClient};
use tomforge_core::judge::{judge_thinking, JudgeConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(reply) = std::str::from_utf8(data) else { return };
    let client = FnClient(|_: &ChatRequest| Ok(ChatResponse::text(reply)));
    let cfg = JudgeConfig { retries: 0, ..JudgeConfig::default() };
    if let Ok(r) = block_on(judge_thinking(&client, &cfg, "s", "q", "a", "t")) {
        assert!(r.logical_coherence <= 10 && r.factual_score <= 10);
        assert!((0.0..=1.0).contains(&r.quality));
    }
});
