use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use tomforge_core::client::{
    ChatClient, ChatRequest, ChatResponse, ClientError, FnClient, RecordReplayClient, ReplayMode,
};
use tomforge_core::eval::{evaluate, report_from_records, user_content, EvalOptions, PromptStyle, SampleRecord};
use tomforge_core::generator::{build_dataset, DatasetSplits, GenConfig};

/// Two samples per order 0..=4, in a fixed order.
fn stratified() -> Vec<SampleRecord> {
    let cfg = GenConfig {
        samples_per_order: 2,
        seed: 99,
        ..GenConfig::default()
    };
    let splits = build_dataset(&cfg).unwrap();
    let mut all = DatasetSplits::records(&splits.train);
    all.extend(DatasetSplits::records(&splits.val));
    all.extend(DatasetSplits::records(&splits.test_ood));
    all.sort_by(|a, b| a.id.cmp(&b.id));
    all
}

fn lookup(samples: &[SampleRecord]) -> HashMap<String, SampleRecord> {
    samples.iter().map(|s| (user_content(&s.story, &s.question), s.clone())).collect()
}

/// Answers correctly exactly when `good` holds for the sample.
fn oracle_client(
    samples: &[SampleRecord],
    good: impl Fn(&SampleRecord) -> bool + Send + Sync,
) -> impl ChatClient {
    let table = lookup(samples);
    FnClient(move |r: &ChatRequest| {
        let s = &table[&r.user_text()];
        let said = if good(s) { s.answer.clone() } else { "nowhere_at_all".to_string() };
        Ok(ChatResponse::text(format!("<think>tracking</think>\n<answer>{said}</answer>")))
    })
}

#[tokio::test]
async fn perfect_and_hopeless_models() {
    let samples = stratified();
    assert_eq!(samples.len(), 10);
    let (_, good) = evaluate(&oracle_client(&samples, |_| true), &samples, &EvalOptions::default()).await.unwrap();
    let (_, bad) = evaluate(&oracle_client(&samples, |_| false), &samples, &EvalOptions::default()).await.unwrap();
    assert_eq!((good.accuracy, good.correct, good.n), (1.0, 10, 10));
    assert_eq!((bad.accuracy, bad.correct), (0.0, 0));
}

#[tokio::test]
async fn per_order_accuracy_matches_direct_count() {
    let samples = stratified();
    let client = oracle_client(&samples, |s| s.order.unwrap() <= 2);
    let (records, report) = evaluate(&client, &samples, &EvalOptions::default()).await.unwrap();

    let mut expected: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
    for s in &samples {
        let e = expected.entry(s.order.unwrap()).or_default();
        e.0 += 1;
        e.1 += usize::from(s.order.unwrap() <= 2);
    }
    let got: BTreeMap<u8, f64> = report.per_order.iter().map(|(k, b)| (*k, b.accuracy)).collect();
    let want: BTreeMap<u8, f64> = expected.iter().map(|(k, (n, c))| (*k, *c as f64 / *n as f64)).collect();
    assert_eq!(got, want);
    assert_eq!(want, BTreeMap::from([(0, 1.0), (1, 1.0), (2, 1.0), (3, 0.0), (4, 0.0)]));
    assert!((report.accuracy - 0.6).abs() < 1e-12);
    assert_eq!(records.iter().map(|r| r.sample_id.as_str()).collect::<Vec<_>>(),
        samples.iter().map(|s| s.id.as_str()).collect::<Vec<_>>());
}

#[tokio::test]
async fn sharding_and_concurrency_do_not_change_results() {
    let samples = stratified();
    let client = oracle_client(&samples, |s| s.id.ends_with('0') || s.order == Some(3));
    let full_opts = EvalOptions { concurrency: 8, ..EvalOptions::default() };
    let (full, full_report) = evaluate(&client, &samples, &full_opts).await.unwrap();
    let mut sharded = Vec::new();
    for shard in samples.chunks(3) {
        let opts = EvalOptions { concurrency: 1, ..EvalOptions::default() };
        sharded.extend(evaluate(&client, shard, &opts).await.unwrap().0);
    }
    let strip = |rs: &[tomforge_core::eval::EvalRecord]| {
        rs.iter().map(|r| (r.sample_id.clone(), r.correct, r.extracted_answer.clone())).collect::<Vec<_>>()
    };
    assert_eq!(strip(&full), strip(&sharded));
    let merged = report_from_records(&sharded, 0);
    assert_eq!((merged.correct, &merged.per_order), (full_report.correct, &full_report.per_order));
}

#[tokio::test]
async fn cot_and_plain_styles_extract_their_own_formats() {
    let samples = stratified();
    let table = lookup(&samples);
    let cot = FnClient(move |r: &ChatRequest| {
        let s = &table[&r.user_text()];
        Ok(ChatResponse::text(format!(
            "Sure.\n{{\"thinking\": \"step by step\", \"answer\": \"{}\"}}",
            s.answer
        )))
    });
    let opts = EvalOptions { style: PromptStyle::Cot, ..EvalOptions::default() };
    let (records, report) = evaluate(&cot, &samples, &opts).await.unwrap();
    assert_eq!(report.accuracy, 1.0);
    assert_eq!(report.extraction_fallbacks, 0);
    assert!(records.iter().all(|r| r.prompt_style == PromptStyle::Cot));

    let table = lookup(&samples);
    let plain = FnClient(move |r: &ChatRequest| {
        assert!(r.system_text().is_none());
        Ok(ChatResponse::text(format!("It is in the {}.", table[&r.user_text()].answer.replace('_', " "))))
    });
    let opts = EvalOptions { style: PromptStyle::Plain, ..EvalOptions::default() };
    assert_eq!(evaluate(&plain, &samples, &opts).await.unwrap().1.accuracy, 1.0);
}

#[tokio::test]
async fn recorded_runs_replay_offline() {
    let samples = stratified();
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.jsonl");
    let inner: Arc<dyn ChatClient> = Arc::new(oracle_client(&samples, |s| s.order != Some(1)));
    let recorder = RecordReplayClient::new(ReplayMode::Record, &store, Some(inner)).unwrap();
    let (live, _) = evaluate(&recorder, &samples, &EvalOptions::default()).await.unwrap();

    let replayer = RecordReplayClient::new(ReplayMode::Replay, &store, None).unwrap();
    assert_eq!(replayer.len(), samples.len());
    let (replayed, report) = evaluate(&replayer, &samples, &EvalOptions::default()).await.unwrap();
    let raw = |rs: &[tomforge_core::eval::EvalRecord]| rs.iter().map(|r| r.raw_response.clone()).collect::<Vec<_>>();
    assert_eq!(raw(&live), raw(&replayed));
    assert!((report.accuracy - 0.8).abs() < 1e-12);

    let other = EvalOptions { temperature: Some(0.7), fail_fast: true, ..EvalOptions::default() };
    let err = evaluate(&replayer, &samples[..1], &other).await.unwrap_err();
    assert!(matches!(err, tomforge_core::eval::EvalError::Client { source: ClientError::CacheMiss { .. }, .. }));
}
