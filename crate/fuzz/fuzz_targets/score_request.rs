#![no_main]

use libfuzzer_sys::fuzz_target;
use tomforge_core::reward::service::{BatchRequest, BatchResponse};
use tomforge_core::reward::{ScoreConfig, ScoreRequest};

fuzz_target!(|data: &[u8]| {
    if let Ok(req) = serde_json::from_slice::<ScoreRequest>(data) {
        let _ = req.score(ScoreConfig::default());
    }
    if let Ok(batch) = serde_json::from_slice::<BatchRequest>(data) {
        let out = BatchResponse { items: batch.items.iter().map(|r| r.score(ScoreConfig::default())).collect() };
        assert_eq!(out.items.len(), batch.items.len());
    }
});
