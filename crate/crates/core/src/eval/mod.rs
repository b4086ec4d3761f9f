//! Dataset I/O, prompt construction, answer extraction, length statistics
//! and the concurrent evaluation loop.

pub mod dataset;
pub mod extract;
pub mod harness;
pub mod prompt;
pub mod stats;

pub use dataset::{
    filter_binary_answers, load_dataset, parse_jsonl, to_jsonl, Answered, Dataset, DatasetError,
    DatasetFormat, SampleRecord, Split,
};
pub use extract::{extract_answer, extract_thinking, is_correct, Extracted};
pub use harness::{evaluate, report_from_records, Bucket, EvalError, EvalOptions, EvalRecord, EvalReport};
pub use prompt::{format_prompt, user_content, PromptStyle, COT_SYSTEM_PROMPT, RL_SYSTEM_PROMPT};
pub use stats::{bootstrap_ci, collapse_ratio, length_stats, mean, LengthStats, StatsError};
