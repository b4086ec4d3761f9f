use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use tomforge_core::adversarial::audit_answer_bias;
use tomforge_core::client::{ChatRequest, ChatResponse, FnClient, Role};
use tomforge_core::eval::COT_SYSTEM_PROMPT;
use tomforge_core::judge::{
    judge_all, judge_thinking, quality, strip_conclusion, transfer_eval, transfer_messages, JudgeConfig,
    JudgeError, JudgeInput, TransferInput, TransferOptions,
};

fn scripted(lc: i64, fs: i64) -> FnClient<impl Fn(&ChatRequest) -> Result<ChatResponse, tomforge_core::client::ClientError>> {
    FnClient(move |r: &ChatRequest| {
        let text = r.user_text();
        Ok(ChatResponse::text(if text.contains("LogicalCoherence") {
            format!("```json\n{{\"LogicalCoherence\": {lc}, \"Evaluation\": \"ok\"}}\n```")
        } else {
            format!("{{\"FactualScore\": \"{fs}\", \"Evaluation\": \"fine\"}}")
        }))
    })
}

#[tokio::test]
async fn quality_is_the_scaled_sum() {
    for (lc, fs) in [(0, 0), (10, 10), (7, 4), (3, 9)] {
        let r = judge_thinking(&scripted(lc, fs), &JudgeConfig::default(), "s", "q", "a", "some thinking")
            .await
            .unwrap();
        assert_eq!((r.logical_coherence as i64, r.factual_score as i64), (lc, fs));
        assert_eq!(r.quality, (lc + fs) as f64 / 20.0);
        assert!(!r.clamped);
    }
    let r = judge_thinking(&scripted(14, -2), &JudgeConfig::default(), "s", "q", "a", "t").await.unwrap();
    assert_eq!((r.logical_coherence, r.factual_score, r.clamped), (10, 0, true));
}

#[tokio::test]
async fn unparseable_judges_are_retried_then_reported() {
    let calls = AtomicUsize::new(0);
    let client = FnClient(|_: &ChatRequest| {
        calls.fetch_add(1, Ordering::SeqCst);
        Ok(ChatResponse::text("I would rate this highly."))
    });
    let cfg = JudgeConfig { retries: 2, ..JudgeConfig::default() };
    let err = judge_thinking(&client, &cfg, "s", "q", "a", "t").await.unwrap_err();
    assert!(matches!(err, JudgeError::Parse { attempts: 3, .. }));
    assert_eq!(calls.load(Ordering::SeqCst), 3);
}

#[tokio::test]
async fn judge_all_keeps_order_and_flags_empty_traces() {
    let inputs: Vec<JudgeInput> = (0..6)
        .map(|i| JudgeInput {
            sample_id: format!("s{i}"),
            story: "s".into(),
            question: "q".into(),
            answer: "a".into(),
            thinking: if i == 2 { "  ".into() } else { format!("trace {i}") },
        })
        .collect();
    let out = judge_all(&scripted(8, 6), &JudgeConfig::default(), &inputs).await;
    let ids: Vec<_> = out.iter().map(|r| r.sample_id.as_str()).collect();
    assert_eq!(ids, ["s0", "s1", "s2", "s3", "s4", "s5"]);
    assert!(out[2].result.is_none() && out[2].error.is_some());
    assert!(out.iter().enumerate().all(|(i, r)| i == 2 || r.result.as_ref().unwrap().quality == 0.7));
}

#[test]
fn transfer_prompt_matches_template() {
    let msgs = transfer_messages("Anne entered the den.", "Where is the ball?", "Anne saw it.");
    assert_eq!(msgs.len(), 2);
    assert_eq!(msgs[0].role, Role::System);
    assert_eq!(msgs[0].content, COT_SYSTEM_PROMPT);
    assert_eq!(
        msgs[1].content,
        "Story: Anne entered the den. \n Question: Where is the ball? \n <think>Anne saw it.</think>"
    );
}

const TRACE: &str = "Owen entered the attic first. He watched the pencil go into the red_box. \
So the pencil is in the green_basket.";

fn parrot() -> FnClient<impl Fn(&ChatRequest) -> Result<ChatResponse, tomforge_core::client::ClientError>> {
    FnClient(|r: &ChatRequest| {
        let text = r.user_text();
        let answer = if text.contains("green_basket") { "green_basket" } else { "unknown" };
        Ok(ChatResponse::text(format!("{{\"thinking\": \"copy\", \"answer\": \"{answer}\"}}")))
    })
}

fn transfer_inputs() -> Vec<TransferInput> {
    (0..4)
        .map(|i| TransferInput {
            sample_id: format!("t{i}"),
            story: "story".into(),
            question: "Where is the pencil really?".into(),
            answer: "green_basket".into(),
            order: Some(4),
            thinking: TRACE.into(),
        })
        .collect()
}

#[tokio::test]
async fn conclusion_carries_the_answer() {
    let inputs = transfer_inputs();
    let with = transfer_eval(&parrot(), &inputs, &TransferOptions::default()).await.unwrap();
    let opts = TransferOptions { with_conclusion: false, ..TransferOptions::default() };
    let without = transfer_eval(&parrot(), &inputs, &opts).await.unwrap();
    let expected_without = inputs
        .iter()
        .filter(|i| strip_conclusion(&i.thinking).text.contains(&i.answer))
        .count() as f64
        / inputs.len() as f64;
    assert_eq!(with.accuracy, 1.0);
    assert_eq!(without.accuracy, expected_without);
    assert_eq!(without.accuracy, 0.0);
    assert_eq!(
        without.records[0].thinking_sent,
        "Owen entered the attic first. He watched the pencil go into the red_box."
    );
}

#[test]
fn bias_fixture_fractions() {
    let mut answers = vec!["yes"; 22];
    answers.extend(vec!["no"; 4]);
    let others = ["red_box", "green_basket", "blue_crate", "pantry"];
    answers.extend((0..74).map(|i| others[i % others.len()]));
    let r = audit_answer_bias(answers.iter().copied());
    assert_eq!(r.total, 100);
    assert_eq!(r.answers["yes"].fraction, 0.22);
    assert_eq!(r.answers["no"].fraction, 0.04);
    assert!(r.flag_binary);
}

fn sentence() -> impl Strategy<Value = String> {
    ("[A-Z][a-z]{1,8}( [a-z_]{1,8}){0,5}", prop_oneof![Just('.'), Just('!'), Just('?')])
        .prop_map(|(words, end)| format!("{words}{end}"))
}

proptest! {
    #[test]
    fn strip_drops_one_sentence_at_a_time(sentences in prop::collection::vec(sentence(), 1..8)) {
        let text = sentences.join(" ");
        let once = strip_conclusion(&text);
        prop_assert_eq!(&once.text, &sentences[..sentences.len() - 1].join(" "));
        prop_assert_eq!(once.emptied, sentences.len() == 1);
        if sentences.len() >= 2 {
            let twice = strip_conclusion(&once.text);
            prop_assert_eq!(twice.text, sentences[..sentences.len() - 2].join(" "));
        }
    }

    #[test]
    fn quality_is_monotone(lc in 0u8..=10, fs in 0u8..=10, dl in 0u8..=10, df in 0u8..=10) {
        let (lc2, fs2) = ((lc + dl).min(10), (fs + df).min(10));
        prop_assert!(quality(lc2, fs2) >= quality(lc, fs));
        prop_assert!((0.0..=1.0).contains(&quality(lc, fs)));
    }

    #[test]
    fn bias_fractions_sum_to_one(answers in prop::collection::vec("[a-c]{1,2}|yes|no", 1..200)) {
        let r = audit_answer_bias(answers.iter().map(String::as_str));
        let total: f64 = r.answers.values().map(|s| s.fraction).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert_eq!(r.answers.values().map(|s| s.count).sum::<usize>(), answers.len());
        prop_assert_eq!(r.flag_binary, answers.iter().any(|a| a == "yes" || a == "no"));
    }
}
