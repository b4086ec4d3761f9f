use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::client::{ChatClient, ChatMessage, ChatRequest};
use crate::eval::{extract_answer, extract_thinking, is_correct, EvalRecord, PromptStyle, COT_SYSTEM_PROMPT};

use super::JudgeError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stripped {
    pub text: String,
    /// Input had at most one sentence, so nothing remains.
    pub emptied: bool,
}

/// Byte offsets one past each sentence terminator that is followed by
/// whitespace or the end of the text.
fn sentence_ends(text: &str) -> Vec<usize> {
    let mut ends = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            match chars.peek() {
                None => ends.push(i + 1),
                Some((_, n)) if n.is_whitespace() => ends.push(i + 1),
                _ => {}
            }
        }
    }
    ends
}

/// Drops the final sentence. Trailing text without a terminator counts as
/// the final sentence.
pub fn strip_conclusion(thinking: &str) -> Stripped {
    let trimmed = thinking.trim_end();
    let mut ends = sentence_ends(trimmed);
    if ends.last() != Some(&trimmed.len()) && !trimmed.is_empty() {
        ends.push(trimmed.len());
    }
    if ends.len() <= 1 {
        return Stripped {
            text: String::new(),
            emptied: true,
        };
    }
    Stripped {
        text: trimmed[..ends[ends.len() - 2]].to_string(),
        emptied: false,
    }
}

/// CoT system prompt plus the story, question and supplied thinking.
/// Empty thinking sends the story and question alone.
pub fn transfer_messages(story: &str, question: &str, thinking: &str) -> Vec<ChatMessage> {
    let user = if thinking.is_empty() {
        format!("Story: {story} \n Question: {question}")
    } else {
        format!("Story: {story} \n Question: {question} \n <think>{thinking}</think>")
    };
    vec![ChatMessage::system(COT_SYSTEM_PROMPT), ChatMessage::user(user)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferInput {
    pub sample_id: String,
    pub story: String,
    pub question: String,
    pub answer: String,
    pub order: Option<u8>,
    pub thinking: String,
}

impl TransferInput {
    /// Thinking comes from the think span (rl) or the "thinking" field
    /// (cot), and is empty when neither is present.
    pub fn from_eval_record(r: &EvalRecord) -> Self {
        let thinking = extract_thinking(&r.raw_response, r.prompt_style).unwrap_or_default();
        TransferInput {
            sample_id: r.sample_id.clone(),
            story: r.story.clone(),
            question: r.question.clone(),
            answer: r.answer.clone(),
            order: r.order,
            thinking,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferOptions {
    pub model: String,
    pub with_conclusion: bool,
    pub concurrency: usize,
    pub fail_fast: bool,
    pub temperature: Option<f64>,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            model: "gpt-4o-mini".into(),
            with_conclusion: true,
            concurrency: 4,
            fail_fast: false,
            temperature: Some(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub sample_id: String,
    pub order: Option<u8>,
    pub thinking_sent: String,
    pub empty_thinking: bool,
    pub raw_response: String,
    pub extracted_answer: String,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub with_conclusion: bool,
    pub empty_thinking: usize,
    pub errors: usize,
    pub records: Vec<TransferRecord>,
}

/// Asks the target model each question with another model's thinking
/// attached and scores its answers.
pub async fn transfer_eval<C: ChatClient + ?Sized>(
    client: &C,
    inputs: &[TransferInput],
    opts: &TransferOptions,
) -> Result<TransferReport, JudgeError> {
    let mut outcomes = stream::iter(inputs)
        .map(|input| async move {
            let thinking = if opts.with_conclusion {
                input.thinking.trim().to_string()
            } else {
                strip_conclusion(&input.thinking).text
            };
            let mut request = ChatRequest::new(
                opts.model.clone(),
                transfer_messages(&input.story, &input.question, &thinking),
            );
            request.temperature = opts.temperature;
            let outcome = client.chat(&request).await;
            (input, thinking, outcome)
        })
        .buffered(opts.concurrency.max(1));

    let mut records = Vec::with_capacity(inputs.len());
    while let Some((input, thinking, outcome)) = outcomes.next().await {
        let (raw, error) = match outcome {
            Ok(r) => (r.content, None),
            Err(e) if opts.fail_fast => return Err(e.into()),
            Err(e) => (String::new(), Some(e.to_string())),
        };
        let extracted = extract_answer(&raw, PromptStyle::Cot).answer;
        records.push(TransferRecord {
            sample_id: input.sample_id.clone(),
            order: input.order,
            empty_thinking: thinking.is_empty(),
            thinking_sent: thinking,
            correct: error.is_none() && is_correct(&extracted, &input.answer),
            extracted_answer: extracted,
            raw_response: raw,
            error,
        });
    }
    let correct = records.iter().filter(|r| r.correct).count();
    Ok(TransferReport {
        n: records.len(),
        correct,
        accuracy: if records.is_empty() {
            0.0
        } else {
            correct as f64 / records.len() as f64
        },
        with_conclusion: opts.with_conclusion,
        empty_thinking: records.iter().filter(|r| r.empty_thinking).count(),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        records,
    })
}
