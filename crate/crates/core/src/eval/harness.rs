use std::collections::BTreeMap;
use std::time::Instant;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use super::dataset::{Dataset, SampleRecord};
use super::extract::{extract_answer, is_correct};
use super::prompt::{format_prompt, PromptStyle};
use super::stats::{length_stats, LengthStats};
use crate::client::{ChatClient, ChatRequest, ClientError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("sample {sample_id}: {source}")]
    Client {
        sample_id: String,
        #[source]
        source: ClientError,
    },
    #[error("concurrency must be at least 1")]
    BadConcurrency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub style: PromptStyle,
    pub concurrency: usize,
    /// Abort on the first client error instead of recording it.
    pub fail_fast: bool,
    pub model: String,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    /// Seed for the bootstrap interval in the report.
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            style: PromptStyle::Rl,
            concurrency: 4,
            fail_fast: false,
            model: String::new(),
            temperature: None,
            max_tokens: None,
            seed: 0,
        }
    }
}

/// One evaluated sample, self-contained so that downstream judging and
/// transfer runs need only this file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_id: String,
    pub dataset: Dataset,
    pub order: Option<u8>,
    pub story: String,
    pub question: String,
    pub answer: String,
    pub prompt_style: PromptStyle,
    pub raw_response: String,
    pub extracted_answer: String,
    pub extraction_fallback: bool,
    pub correct: bool,
    pub response_tokens: usize,
    pub response_chars: usize,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EvalRecord {
    /// Builds a record from a response; `correct` is derived, never supplied.
    pub fn from_response(
        sample: &SampleRecord,
        style: PromptStyle,
        raw: String,
        latency_ms: u64,
        error: Option<String>,
    ) -> Self {
        let extracted = extract_answer(&raw, style);
        let correct = error.is_none() && is_correct(&extracted.answer, &sample.answer);
        EvalRecord {
            sample_id: sample.id.clone(),
            dataset: sample.dataset,
            order: sample.order,
            story: sample.story.clone(),
            question: sample.question.clone(),
            answer: sample.answer.clone(),
            prompt_style: style,
            response_tokens: raw.split_whitespace().count(),
            response_chars: raw.chars().count(),
            extracted_answer: extracted.answer,
            extraction_fallback: extracted.fallback,
            correct,
            raw_response: raw,
            latency_ms,
            error,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Bucket {
    fn add(&mut self, correct: bool) {
        self.n += 1;
        self.correct += usize::from(correct);
        self.accuracy = self.correct as f64 / self.n as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub errors: usize,
    pub extraction_fallbacks: usize,
    pub per_dataset: BTreeMap<Dataset, Bucket>,
    pub per_order: BTreeMap<u8, Bucket>,
    pub length: Option<LengthStats>,
}

/// Aggregates records; accuracy of an empty set is 0.
pub fn report_from_records(records: &[EvalRecord], seed: u64) -> EvalReport {
    let mut total = Bucket::default();
    let mut per_dataset: BTreeMap<Dataset, Bucket> = BTreeMap::new();
    let mut per_order: BTreeMap<u8, Bucket> = BTreeMap::new();
    for r in records {
        total.add(r.correct);
        per_dataset.entry(r.dataset).or_default().add(r.correct);
        if let Some(k) = r.order {
            per_order.entry(k).or_default().add(r.correct);
        }
    }
    let tokens: Vec<usize> = records.iter().map(|r| r.response_tokens).collect();
    let chars: Vec<usize> = records.iter().map(|r| r.response_chars).collect();
    EvalReport {
        n: total.n,
        correct: total.correct,
        accuracy: total.accuracy,
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        extraction_fallbacks: records.iter().filter(|r| r.extraction_fallback).count(),
        per_dataset,
        per_order,
        length: length_stats(&tokens, &chars, seed).ok(),
    }
}

/// Sends one chat request per sample with at most `concurrency` in flight.
/// Records come back in sample order.
pub async fn evaluate<C: ChatClient + ?Sized>(
    client: &C,
    samples: &[SampleRecord],
    opts: &EvalOptions,
) -> Result<(Vec<EvalRecord>, EvalReport), EvalError> {
    if opts.concurrency == 0 {
        return Err(EvalError::BadConcurrency);
    }
    let mut results = stream::iter(samples.iter())
        .map(|sample| async move {
            let mut request = ChatRequest::new(
                opts.model.clone(),
                format_prompt(&sample.story, &sample.question, opts.style),
            );
            request.temperature = opts.temperature;
            request.max_tokens = opts.max_tokens;
            let started = Instant::now();
            let outcome = client.chat(&request).await;
            (sample, outcome, started.elapsed().as_millis() as u64)
        })
        .buffered(opts.concurrency);

    let mut records = Vec::with_capacity(samples.len());
    while let Some((sample, outcome, latency)) = results.next().await {
        let record = match outcome {
            Ok(resp) => EvalRecord::from_response(sample, opts.style, resp.content, latency, None),
            Err(source) if opts.fail_fast => {
                return Err(EvalError::Client {
                    sample_id: sample.id.clone(),
                    source,
                })
            }
            Err(e) => {
                warn!(sample = %sample.id, error = %e, "chat call failed; recorded as incorrect");
                EvalRecord::from_response(sample, opts.style, String::new(), latency, Some(e.to_string()))
            }
        };
        debug!(sample = %record.sample_id, correct = record.correct, "evaluated");
        records.push(record);
    }
    let report = report_from_records(&records, opts.seed);
    Ok((records, report))
}
