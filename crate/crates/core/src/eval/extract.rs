use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::prompt::PromptStyle;
use crate::reward::{match_answer, parse_tags};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extracted {
    pub answer: String,
    /// The style-specific extraction failed and the whole response was used.
    pub fallback: bool,
}

/// First JSON object in `raw`, scanning from each `{` in turn.
pub(crate) fn first_object_with(raw: &str, key: &str) -> Option<Map<String, Value>> {
    raw.char_indices()
        .filter(|&(_, c)| c == '{')
        .find_map(|(i, _)| {
            let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
            match stream.next() {
                Some(Ok(Value::Object(map))) if map.contains_key(key) => Some(map),
                _ => None,
            }
        })
}

fn field_text(map: &Map<String, Value>, key: &str) -> Option<String> {
    match map.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Null => None,
        other => Some(other.to_string()),
    }
}

pub fn extract_answer(raw: &str, style: PromptStyle) -> Extracted {
    let found = match style {
        PromptStyle::Rl => parse_tags(raw, true)
            .answer_span
            .map(|a| a.trim().to_string())
            .filter(|a| !a.is_empty()),
        PromptStyle::Cot => first_object_with(raw, "answer").and_then(|m| field_text(&m, "answer")),
        PromptStyle::Plain => {
            return Extracted {
                answer: raw.to_string(),
                fallback: false,
            }
        }
    };
    match found {
        Some(answer) => Extracted {
            answer,
            fallback: false,
        },
        None => Extracted {
            answer: raw.to_string(),
            fallback: true,
        },
    }
}

/// Reasoning text: the think span for rl, the "thinking" field for cot.
pub fn extract_thinking(raw: &str, style: PromptStyle) -> Option<String> {
    match style {
        PromptStyle::Rl => parse_tags(raw, true).think_span.map(|t| t.trim().to_string()),
        PromptStyle::Cot => first_object_with(raw, "thinking").and_then(|m| field_text(&m, "thinking")),
        PromptStyle::Plain => None,
    }
}

/// Answer match where an unusable ground truth counts as incorrect.
pub fn is_correct(extracted: &str, ground_truth: &str) -> bool {
    match_answer(extracted, ground_truth).unwrap_or(false)
}
