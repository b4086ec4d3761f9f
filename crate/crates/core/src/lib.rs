//! Higher-order Theory-of-Mind benchmark toolkit.
//!
//! * [`story`]: typed story DSL with a template renderer and parser.
//! * [`oracle`]: ground-truth nested-belief answers (two independent routes).
//! * [`generator`]: seeded Hi-ToM-style story and dataset generation.
//! * [`adversarial`]: best-first search for hard stories, infilling, bias audit.
//! * [`reward`]: format/answer rewards for RL responses and the scoring service.
//! * [`eval`]: dataset I/O, prompts, answer extraction and accuracy reports.
//! * [`judge`]: thinking-quality judging and knowledge-transfer runs.
//! * [`client`]: OpenAI-compatible chat client with record/replay.

pub mod adversarial;
pub mod client;
pub mod eval;
pub mod fixtures;
pub mod generator;
pub mod judge;
pub mod oracle;
pub mod reward;
pub mod story;
