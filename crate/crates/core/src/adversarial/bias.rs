use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerShare {
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub total: usize,
    pub answers: BTreeMap<String, AnswerShare>,
    /// Some answer is "yes" or "no" (case-insensitive).
    pub flag_binary: bool,
}

/// Exact empirical distribution of answer strings.
pub fn audit_answer_bias<'a>(answers: impl IntoIterator<Item = &'a str>) -> BiasReport {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for a in answers {
        *counts.entry(a.to_string()).or_default() += 1;
        total += 1;
    }
    let flag_binary = counts
        .keys()
        .any(|k| matches!(k.trim().to_lowercase().as_str(), "yes" | "no"));
    let answers = counts
        .into_iter()
        .map(|(k, count)| {
            let fraction = count as f64 / total as f64;
            (k, AnswerShare { count, fraction })
        })
        .collect();
    BiasReport {
        total,
        answers,
        flag_binary,
    }
}
