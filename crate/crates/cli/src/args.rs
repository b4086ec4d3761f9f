use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ScorerKind;

#[derive(Debug, Parser)]
#[command(name = "tomforge", version, about = "Higher-order Theory-of-Mind benchmark toolkit")]
pub struct Cli {
    /// Seed for every random stream; overrides config values.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file with per-command sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print errors as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Log filter, e.g. `info` or `tomforge_core=debug`.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate train/val/test_ood JSONL splits.
    Generate(GenerateArgs),
    /// Answer one question about one story with the oracle.
    Answer(AnswerArgs),
    /// Score responses or run the scoring service.
    #[command(subcommand)]
    Reward(RewardCommand),
    /// Evaluate a chat model on a dataset.
    Eval(EvalArgs),
    /// Search for stories with many belief-divergence points.
    Adversarial(AdversarialArgs),
    /// Judge reasoning traces from an eval records file.
    Judge(JudgeArgs),
    /// Feed reasoning traces to a target model and measure its accuracy.
    Transfer(TransferArgs),
    /// Report the answer distribution of a dataset.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// 600 samples per order 0..=4, split 2000/400/600.
    Paper,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub samples_per_order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnswerArgs {
    /// File containing the story text.
    #[arg(long)]
    pub story: PathBuf,
    #[arg(long)]
    pub question: String,
    /// Also run the independent oracle and fail if the answers differ.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Subcommand)]
pub enum RewardCommand {
    /// Score a JSONL file of {response, ground_truth} objects.
    Score(RewardScoreArgs),
    /// Serve the scoring API over HTTP.
    Serve(RewardServeArgs),
}

#[derive(Debug, Args)]
pub struct RewardFlags {
    /// Accept a response that omits the opening think tag.
    #[arg(long)]
    pub implicit_think: bool,
    /// Allow text outside the think and answer blocks.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct RewardScoreArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub flags: RewardFlags,
}

#[derive(Debug, Args)]
pub struct RewardServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub host: Option<String>,
    #[command(flatten)]
    pub flags: RewardFlags,
}

#[derive(Debug, Args)]
pub struct EndpointArgs {
    /// Base URL of an OpenAI-compatible API.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Serve responses from this record store without network access.
    #[arg(long, conflicts_with = "record")]
    pub replay: Option<PathBuf>,
    /// Append every exchange to this record store.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Rl,
    Cot,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: Format,
    #[arg(long, value_enum)]
    pub style: Option<Style>,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub fail_fast: bool,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-sample records JSONL.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdversarialArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// JSON search context (agents, rooms, objects, containers).
    #[arg(long)]
    pub context: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    #[arg(long)]
    pub max_expansions: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub min_depth: Option<usize>,
    /// Rewrite the found story as prose with the configured model.
    #[arg(long)]
    pub infill: bool,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long = "judge-endpoint")]
    pub judge_endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, conflicts_with = "record")]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long = "target-endpoint")]
    pub target_endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, conflicts_with = "record")]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Remove the final sentence of each trace before sending it.
    #[arg(long)]
    pub strip_conclusion: bool,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub fail_fast: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: Format,
    /// Report JSON; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
