//! Format and answer rewards for tagged RL responses.
//!
//! Rewards are integers: format is +1/-1, answer is +2/-2, and the total is
//! their sum, so it is always one of 3, -1 or -3.

pub mod service;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";
const ANSWER_OPEN: &str = "<answer>";
const ANSWER_CLOSE: &str = "</answer>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewardError {
    #[error("ground truth is empty after normalization")]
    EmptyGroundTruth,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagParse {
    pub well_formed: bool,
    pub think_span: Option<String>,
    pub answer_span: Option<String>,
    pub implicit_think_used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreConfig {
    /// Treat a missing leading `<think>` as present when `</think>` precedes `<answer>`.
    pub implicit_think: bool,
    /// Strict mode allows only whitespace outside the two blocks.
    pub strict: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            implicit_think: false,
            strict: true,
        }
    }
}

fn between<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = s.find(open)? + open.len();
    let end = s[start..].find(close)? + start;
    Some(&s[start..end])
}

fn only_whitespace(s: &str) -> bool {
    s.chars().all(char::is_whitespace)
}

fn structure(text: &str, strict: bool) -> bool {
    for tag in [THINK_OPEN, THINK_CLOSE, ANSWER_OPEN, ANSWER_CLOSE] {
        if text.matches(tag).count() != 1 {
            return false;
        }
    }
    let (to, tc, ao, ac) = (
        text.find(THINK_OPEN).unwrap_or(usize::MAX),
        text.find(THINK_CLOSE).unwrap_or(usize::MAX),
        text.find(ANSWER_OPEN).unwrap_or(usize::MAX),
        text.find(ANSWER_CLOSE).unwrap_or(usize::MAX),
    );
    if !(to < tc && tc < ao && ao < ac) {
        return false;
    }
    if !strict {
        return true;
    }
    only_whitespace(&text[..to])
        && only_whitespace(&text[tc + THINK_CLOSE.len()..ao])
        && only_whitespace(&text[ac + ANSWER_CLOSE.len()..])
}

/// Strict tag parse with the default configuration.
pub fn parse_tags(response: &str, implicit_think: bool) -> TagParse {
    parse_tags_with(
        response,
        ScoreConfig {
            implicit_think,
            ..ScoreConfig::default()
        },
    )
}

/// Spans are extracted best-effort from the first tag pairs even when the
/// response is malformed; `well_formed` alone decides the format reward.
pub fn parse_tags_with(response: &str, cfg: ScoreConfig) -> TagParse {
    let implicit = cfg.implicit_think
        && !response.trim_start().starts_with(THINK_OPEN)
        && match (response.find(THINK_CLOSE), response.find(ANSWER_OPEN)) {
            (Some(c), Some(a)) => c < a,
            _ => false,
        };
    let owned;
    let text = if implicit {
        owned = format!("{THINK_OPEN}{response}");
        owned.as_str()
    } else {
        response
    };
    let think_span = between(text, THINK_OPEN, THINK_CLOSE).map(str::to_string);
    let answer_span = between(text, ANSWER_OPEN, ANSWER_CLOSE).map(str::to_string);
    let well_formed = structure(text, cfg.strict)
        && answer_span.as_deref().is_some_and(|a| !a.trim().is_empty());
    TagParse {
        well_formed,
        think_span,
        answer_span,
        implicit_think_used: implicit,
    }
}

/// Lowercase, underscores to spaces, collapsed whitespace, no terminal punctuation.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase().replace('_', " ");
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| c.is_ascii_punctuation())
        .trim_end()
        .to_string()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// True iff the normalized ground truth occurs in the normalized answer as a
/// whole-word phrase.
pub fn match_answer(answer_text: &str, ground_truth: &str) -> Result<bool, RewardError> {
    let needle = normalize(ground_truth);
    if needle.is_empty() {
        return Err(RewardError::EmptyGroundTruth);
    }
    let hay = normalize(answer_text);
    Ok(hay.match_indices(&needle).any(|(start, m)| {
        let end = start + m.len();
        let before_ok = hay[..start].chars().next_back().is_none_or(|c| !is_word_char(c))
            || !needle.chars().next().is_some_and(is_word_char);
        let after_ok = hay[end..].chars().next().is_none_or(|c| !is_word_char(c))
            || !needle.chars().next_back().is_some_and(is_word_char);
        before_ok && after_ok
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub format: i32,
    pub answer: i32,
    pub total: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub format_reward: i32,
    pub answer_reward: i32,
    pub total: i32,
    pub well_formed: bool,
    pub extracted_answer: Option<String>,
}

/// An empty ground truth never matches.
pub fn score(response: &str, ground_truth: &str, cfg: ScoreConfig) -> RewardBreakdown {
    score_detailed(response, ground_truth, cfg).0
}

pub fn score_detailed(
    response: &str,
    ground_truth: &str,
    cfg: ScoreConfig,
) -> (RewardBreakdown, TagParse) {
    let parsed = parse_tags_with(response, cfg);
    let format = if parsed.well_formed { 1 } else { -1 };
    let matched = parsed.well_formed
        && parsed
            .answer_span
            .as_deref()
            .is_some_and(|a| match_answer(a, ground_truth).unwrap_or(false));
    let answer = if matched { 2 } else { -2 };
    (
        RewardBreakdown {
            format,
            answer,
            total: format + answer,
        },
        parsed,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub response: String,
    pub ground_truth: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implicit_think: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
}

impl ScoreRequest {
    /// Per-request flags override `defaults`.
    pub fn score(&self, defaults: ScoreConfig) -> ScoreResult {
        let cfg = ScoreConfig {
            implicit_think: self.implicit_think.unwrap_or(defaults.implicit_think),
            strict: self.strict.unwrap_or(defaults.strict),
        };
        let (b, parsed) = score_detailed(&self.response, &self.ground_truth, cfg);
        ScoreResult {
            format_reward: b.format,
            answer_reward: b.answer,
            total: b.total,
            well_formed: parsed.well_formed,
            extracted_answer: parsed.answer_span.map(|a| a.trim().to_string()),
        }
    }
}
