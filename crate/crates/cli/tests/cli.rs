use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use serde_json::Value;
use tomforge_core::client::{ChatClient, ChatRequest, ChatResponse, FnClient, RecordReplayClient, ReplayMode};
use tomforge_core::eval::{evaluate, load_dataset, DatasetFormat, EvalOptions, SampleRecord};
use tomforge_core::fixtures::{TANGERINE_ANSWER, TANGERINE_QUESTION, TANGERINE_STORY};
use tomforge_core::judge::{transfer_eval, TransferInput, TransferOptions};

fn tomforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomforge"))
        .current_dir(dir)
        .args(["--log-level", "warn"])
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn answers_the_tangerine_question() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("story.txt"), TANGERINE_STORY).unwrap();
    let out = tomforge(dir.path(), &["answer", "--story", "story.txt", "--question", TANGERINE_QUESTION, "--check"]);
    assert_eq!(stdout(&out).trim(), TANGERINE_ANSWER);
}

#[test]
fn small_generation_is_seed_stable() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, seed) in [("a", "3"), ("b", "3"), ("c", "4")] {
        let out = tomforge(dir.path(), &["--seed", seed, "generate", "--samples-per-order", "6", "--out", sub]);
        let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!((summary["train"].as_u64(), summary["val"].as_u64(), summary["test_ood"].as_u64()), (Some(20), Some(4), Some(6)));
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/train.jsonl"), read("b/train.jsonl"));
    assert_ne!(read("a/train.jsonl"), read("c/train.jsonl"));
    let test = load_dataset(&dir.path().join("a/test_ood.jsonl"), DatasetFormat::Jsonl).unwrap();
    assert!(test.iter().all(|s| s.order == Some(4)));
}

#[test]
fn reward_score_writes_one_line_per_request() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("in.jsonl"),
        concat!(
            "{\"response\":\"<think>a</think><answer>box</answer>\",\"ground_truth\":\"box\"}\n",
            "{\"response\":\"box\",\"ground_truth\":\"box\"}\n",
            "{\"response\":\"a</think><answer>bag</answer>\",\"ground_truth\":\"box\"}\n",
        ),
    )
    .unwrap();
    stdout(&tomforge(dir.path(), &["reward", "score", "--in", "in.jsonl", "--out", "out.jsonl", "--implicit-think"]));
    let lines: Vec<Value> = fs::read_to_string(dir.path().join("out.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let totals: Vec<i64> = lines.iter().map(|l| l["total"].as_i64().unwrap()).collect();
    assert_eq!(totals, [3, -3, -1]);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = tomforge(dir.path(), &["--json-errors", "eval", "--dataset", "nope.jsonl", "--out", "r.json", "--replay", "x"]);
    assert_eq!(missing.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["kind"], "usage");
    assert_eq!(tomforge(dir.path(), &["frobnicate"]).status.code(), Some(2));
    fs::write(dir.path().join("bad.json"), "{\"reward\": {\"colour\": 1}}").unwrap();
    let bad = tomforge(dir.path(), &["--config", "bad.json", "audit", "--dataset", "x.jsonl"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(tomforge(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn schema_violations_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.jsonl"), "{\"id\":\"x\"}\n").unwrap();
    let out = tomforge(dir.path(), &["audit", "--dataset", "d.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
}

fn answering(samples: &[SampleRecord]) -> Arc<dyn ChatClient> {
    let table: std::collections::HashMap<String, String> = samples
        .iter()
        .map(|s| (format!("Story: {}\n Question: {}", s.story, s.question), s.answer.clone()))
        .collect();
    Arc::new(FnClient(move |r: &ChatRequest| {
        let key = r.user_text();
        let answer = table.get(&key).cloned().unwrap_or_default();
        Ok(ChatResponse::text(format!(
            "<think>I tracked every move. The object ends in the {answer}.</think>\n<answer>{answer}</answer>"
        )))
    }))
}

#[tokio::test(flavor = "multi_thread")]
async fn eval_and_transfer_replay_offline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&tomforge(d, &["--seed", "5", "generate", "--samples-per-order", "2", "--out", "data"]));
    let samples = load_dataset(&d.join("data/test_ood.jsonl"), DatasetFormat::Jsonl).unwrap();

    let store = d.join("eval_store.jsonl");
    let rec = RecordReplayClient::new(ReplayMode::Record, &store, Some(answering(&samples))).unwrap();
    evaluate(&rec, &samples, &EvalOptions::default()).await.unwrap();

    let out = tomforge(d, &[
        "eval", "--dataset", "data/test_ood.jsonl", "--replay", "eval_store.jsonl",
        "--out", "report.json", "--records", "records.jsonl",
    ]);
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["accuracy"], 1.0);
    let report: Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["per_order"]["4"]["n"], 2);

    let records: Vec<tomforge_core::eval::EvalRecord> = fs::read_to_string(d.join("records.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let inputs: Vec<TransferInput> = records.iter().map(TransferInput::from_eval_record).collect();
    let target: Arc<dyn ChatClient> = Arc::new(FnClient(|r: &ChatRequest| {
        let text = r.user_text();
        let guess = text
            .split("ends in the ")
            .nth(1)
            .and_then(|t| t.split('.').next())
            .unwrap_or("nowhere");
        Ok(ChatResponse::text(format!("{{\"thinking\": \"t\", \"answer\": \"{guess}\"}}")))
    }));
    let tstore = d.join("transfer_store.jsonl");
    let opts = TransferOptions { with_conclusion: false, ..TransferOptions::default() };
    let rec = RecordReplayClient::new(ReplayMode::Record, &tstore, Some(target)).unwrap();
    transfer_eval(&rec, &inputs, &opts).await.unwrap();

    stdout(&tomforge(d, &[
        "transfer", "--records", "records.jsonl", "--replay", "transfer_store.jsonl",
        "--strip-conclusion", "--out", "transfer.json",
    ]));
    let t: Value = serde_json::from_str(&fs::read_to_string(d.join("transfer.json")).unwrap()).unwrap();
    assert_eq!(t["accuracy"], 0.0);
    assert_eq!(t["n"], 2);
    assert_eq!(t["records"][0]["thinking_sent"], "I tracked every move.");
}

#[test]
fn adversarial_writes_a_story() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&tomforge(dir.path(), &["adversarial", "--out", "adv.json", "--max-expansions", "2000"]));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("adv.json")).unwrap()).unwrap();
    assert!(v["search"]["divergence_points"].as_u64().unwrap() >= 3);
    assert!(v["story_text"].as_str().unwrap().contains("vintage typewriter"));
}
