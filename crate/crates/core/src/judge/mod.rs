//! Rubric judging of reasoning traces and the knowledge-transfer run.

mod transfer;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tracing::warn;

use crate::client::{ChatClient, ChatMessage, ChatRequest, ClientError};
use crate::eval::extract::first_object_with;

pub use transfer::{
    strip_conclusion, transfer_eval, transfer_messages, Stripped, TransferInput, TransferOptions,
    TransferRecord, TransferReport,
};

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("thinking is empty")]
    EmptyThinking,
    #[error("judge reply for {key} unparseable after {attempts} attempts: {last_reply:?}")]
    Parse {
        key: &'static str,
        attempts: u32,
        last_reply: String,
    },
    #[error(transparent)]
    Client(#[from] ClientError),
}

pub fn coherence_prompt(question: &str, answer: &str, thinking: &str) -> String {
    format!(
        "You are an expert in evaluating Theory of Mind reasoning. Your task is to assess a student's explanation for a complex Theory of Mind question.\n\
\n\
The evaluation will proceed as follows:\n\
1. You will first read a Theory of Mind question and the correct answer.\n\
2. Then, you will be shown a student's thinking process in response to the question.\n\
3. Please evaluate the student's thinking process based on the following criteria:\n\
\n\
- **Logical Coherence (0–10 points)**: Does the reasoning make sense as a whole? Evaluate whether the thinking is internally consistent, logically structured, and meaningfully sequenced.\n  \
- 0 – Completely incoherent: ideas are contradictory, disorganized, or temporally scrambled.\n  \
- 5 – Partially coherent: some valid reasoning exists, but the steps are confusing, redundant, or lack a clear flow.\n  \
- 10 – Fully coherent: reasoning is orderly, step-by-step, and clearly follows the timeline and causal structure of the events and beliefs.\n\
- **Evaluation**: Write a short explanation (1–2 sentences) justifying your judgment, pointing out any key strengths or flaws.\n\
\n\
Return your evaluation in the following JSON format:\n\
{{\"LogicalCoherence\": 0–10, \"Evaluation\": \"A short explanation\"}}\n\
\n\
Here is the question and the correct answer:\n\
Question: {question}\n\
Answer: {answer}\n\
\n\
Here is the student's thinking process:\n\
{thinking}\n"
    )
}

pub fn factual_prompt(story: &str, question: &str, answer: &str, thinking: &str) -> String {
    format!(
        "You are an expert in evaluating Theory of Mind reasoning. Your task is to assess a student's explanation for a complex Theory of Mind question based on a given story.\n\
\n\
The evaluation will proceed as follows:\n\
1. You will first read a story, a Theory of Mind question based on that story, and the correct answer.\n\
2. Then, you will be shown a student's thinking process in response to the question.\n\
3. Please evaluate the student's explanation based on the following criteria:\n\
\n\
- **Factual Alignment (0–10 points)**: Does the reasoning accurately reflect the facts in the story? Evaluate whether the steps in the student\u{2019}s thinking are grounded in the actual events, character actions, and timelines described.\n  \
- 0 – Major factual errors or hallucinations; reasoning contradicts the story.\n  \
- 5 – Some facts are correct, but key details are omitted, misremembered, or inaccurately applied.\n  \
- 10 – All relevant details are accurate and clearly support the reasoning.\n\
- **Evaluation**: Write a short explanation (1–2 sentences) justifying your judgment, pointing out any key strengths or flaws.\n\
\n\
Return your evaluation in the following JSON format:\n\
{{\"FactualScore\": 0–10, \"Evaluation\": \"A short explanation\"}}\n\
\n\
Here is the story and the correct answer:\n\
{story}\n\
Question: {question}\n\
Answer: {answer}\n\
\n\
Here is the student's thinking process:\n\
{thinking}\n"
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeConfig {
    pub model: String,
    /// Extra attempts per prompt when the reply has no usable score.
    pub retries: u32,
    pub concurrency: usize,
    pub temperature: Option<f64>,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        JudgeConfig {
            model: "gpt-4.1".into(),
            retries: 2,
            concurrency: 4,
            temperature: Some(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeResult {
    pub logical_coherence: u8,
    pub factual_score: u8,
    /// `(logical_coherence + factual_score) / 20`.
    pub quality: f64,
    pub coherence_evaluation: String,
    pub factual_evaluation: String,
    /// A raw score fell outside 0..=10 and was clamped.
    pub clamped: bool,
}

pub fn quality(logical_coherence: u8, factual_score: u8) -> f64 {
    f64::from(logical_coherence + factual_score) / 20.0
}

struct Score {
    value: u8,
    evaluation: String,
    clamped: bool,
}

fn parse_score(reply: &str, key: &str) -> Option<Score> {
    let obj = first_object_with(reply, key)?;
    let raw = match obj.get(key)? {
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i,
            (None, Some(f)) if f.fract() == 0.0 && f.is_finite() => f as i64,
            _ => return None,
        },
        Value::String(s) => s.trim().parse::<i64>().ok()?,
        _ => return None,
    };
    let value = raw.clamp(0, 10) as u8;
    let evaluation = match obj.get("Evaluation") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => String::new(),
    };
    Some(Score {
        value,
        evaluation,
        clamped: i64::from(value) != raw,
    })
}

async fn ask<C: ChatClient + ?Sized>(
    client: &C,
    cfg: &JudgeConfig,
    prompt: String,
    key: &'static str,
) -> Result<Score, JudgeError> {
    let mut request = ChatRequest::new(cfg.model.clone(), vec![ChatMessage::user(prompt)]);
    request.temperature = cfg.temperature;
    let attempts = cfg.retries + 1;
    let mut last_reply = String::new();
    for attempt in 1..=attempts {
        let reply = client.chat(&request).await?.content;
        if let Some(score) = parse_score(&reply, key) {
            return Ok(score);
        }
        warn!(key, attempt, "judge reply has no usable score");
        last_reply = reply;
    }
    Err(JudgeError::Parse {
        key,
        attempts,
        last_reply,
    })
}

/// Scores `thinking` with the coherence and factual-alignment prompts.
pub async fn judge_thinking<C: ChatClient + ?Sized>(
    client: &C,
    cfg: &JudgeConfig,
    story: &str,
    question: &str,
    answer: &str,
    thinking: &str,
) -> Result<JudgeResult, JudgeError> {
    if thinking.trim().is_empty() {
        return Err(JudgeError::EmptyThinking);
    }
    let lc = ask(client, cfg, coherence_prompt(question, answer, thinking), "LogicalCoherence").await?;
    let fs = ask(client, cfg, factual_prompt(story, question, answer, thinking), "FactualScore").await?;
    Ok(JudgeResult {
        logical_coherence: lc.value,
        factual_score: fs.value,
        quality: quality(lc.value, fs.value),
        coherence_evaluation: lc.evaluation,
        factual_evaluation: fs.evaluation,
        clamped: lc.clamped || fs.clamped,
    })
}

/// One trace to judge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeInput {
    pub sample_id: String,
    pub story: String,
    pub question: String,
    pub answer: String,
    pub thinking: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgedRecord {
    pub sample_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<JudgeResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Judges every input with bounded concurrency; output order matches input.
pub async fn judge_all<C: ChatClient + ?Sized>(
    client: &C,
    cfg: &JudgeConfig,
    inputs: &[JudgeInput],
) -> Vec<JudgedRecord> {
    stream::iter(inputs)
        .map(|i| async move {
            let outcome =
                judge_thinking(client, cfg, &i.story, &i.question, &i.answer, &i.thinking).await;
            match outcome {
                Ok(r) => JudgedRecord {
                    sample_id: i.sample_id.clone(),
                    result: Some(r),
                    error: None,
                },
                Err(e) => JudgedRecord {
                    sample_id: i.sample_id.clone(),
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .buffered(cfg.concurrency.max(1))
        .collect()
        .await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::{ChatResponse, FnClient};

    fn scripted(lc: &'static str, fs: &'static str) -> impl ChatClient {
        FnClient(move |r: &ChatRequest| {
            let text = r.user_text();
            Ok(ChatResponse::text(if text.contains("LogicalCoherence") {
                lc
            } else {
                fs
            }))
        })
    }

    async fn run(c: &impl ChatClient) -> Result<JudgeResult, JudgeError> {
        judge_thinking(c, &JudgeConfig::default(), "s", "q", "a", "t").await
    }

    #[tokio::test]
    async fn quality_from_scores() {
        let c = scripted(
            r#"{"LogicalCoherence": 8, "Evaluation": "ok"}"#,
            r#"Here: {"FactualScore": 6, "Evaluation": "meh"}"#,
        );
        let r = run(&c).await.unwrap();
        assert_eq!((r.logical_coherence, r.factual_score), (8, 6));
        assert!((r.quality - 0.70).abs() < 1e-12);
        assert_eq!(r.factual_evaluation, "meh");

        let c = scripted(r#"{"LogicalCoherence": 10}"#, r#"{"FactualScore": 10}"#);
        assert_eq!(run(&c).await.unwrap().quality, 1.0);
    }

    #[tokio::test]
    async fn out_of_range_is_clamped() {
        let c = scripted(r#"{"LogicalCoherence": 14}"#, r#"{"FactualScore": -2}"#);
        let r = run(&c).await.unwrap();
        assert_eq!((r.logical_coherence, r.factual_score, r.clamped), (10, 0, true));
    }

    #[tokio::test]
    async fn prose_fails_after_retries() {
        let calls = std::sync::atomic::AtomicU32::new(0);
        let c = FnClient(|_: &ChatRequest| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(ChatResponse::text("The reasoning is pretty good."))
        });
        match run(&c).await {
            Err(JudgeError::Parse { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 3);
    }

    #[tokio::test]
    async fn empty_thinking_rejected() {
        let c = scripted("", "");
        let r = judge_thinking(&c, &JudgeConfig::default(), "s", "q", "a", "  ").await;
        assert!(matches!(r, Err(JudgeError::EmptyThinking)));
    }

    #[test]
    fn prompt_placeholders() {
        let p = coherence_prompt("Q?", "box", "THINK");
        assert!(p.contains("\nQuestion: Q?\nAnswer: box\n\nHere is the student's thinking process:\nTHINK\n"));
        assert!(p.contains("{\"LogicalCoherence\": 0–10, \"Evaluation\": \"A short explanation\"}"));
        let f = factual_prompt("STORY", "Q?", "box", "THINK");
        assert!(f.contains("the correct answer:\nSTORY\nQuestion: Q?"));
        assert!(f.contains("student\u{2019}s thinking are grounded"));
    }
}
