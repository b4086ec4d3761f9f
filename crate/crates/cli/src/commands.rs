use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use tracing::info;

use tomforge_core::adversarial::{
    astar_search, infill_story, DifficultyScorer, ModelScorer, SearchContext, SearchError,
    SearchResult, SyntheticScorer,
};
use tomforge_core::client::{ChatClient, HttpChatClient, HttpConfig, RecordReplayClient, ReplayMode};
use tomforge_core::eval::{
    evaluate, load_dataset, DatasetError, DatasetFormat, EvalRecord, PromptStyle, SampleRecord,
};
use tomforge_core::generator::{build_dataset, GenConfig, GenError};
use tomforge_core::judge::{judge_all, transfer_eval, JudgeInput, JudgedRecord, TransferInput};
use tomforge_core::oracle::{answer_query, brute_force_answer};
use tomforge_core::reward::{service, ScoreConfig, ScoreRequest, ScoreResult};
use tomforge_core::story::{parse_question, parse_story, render_question_in, render_story};

use crate::args::*;
use crate::config::{CliConfig, ScorerKind};
use crate::error::{CliError, CliResult};
use crate::io::{parse_jsonl_rows, read_input, write_json, write_jsonl};

pub struct Ctx {
    pub config: CliConfig,
    pub seed: Option<u64>,
}

fn log_resolved<T: Serialize>(what: &str, value: &T) {
    let text = serde_json::to_string(value).unwrap_or_default();
    info!(command = what, config = %text, "resolved configuration");
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    println!("{}", serde_json::to_string(value).map_err(CliError::runtime)?);
    Ok(())
}

fn endpoint_client(
    base: &HttpConfig,
    endpoint: Option<&str>,
    replay: Option<&PathBuf>,
    record: Option<&PathBuf>,
) -> CliResult<Arc<dyn ChatClient>> {
    if let Some(path) = replay {
        let c = RecordReplayClient::new(ReplayMode::Replay, path, None)
            .map_err(CliError::usage)?;
        return Ok(Arc::new(c));
    }
    let mut cfg = base.clone();
    if let Some(e) = endpoint {
        cfg.base_url = e.to_string();
    }
    let http: Arc<dyn ChatClient> =
        Arc::new(HttpChatClient::new(cfg.with_env()).map_err(CliError::usage)?);
    match record {
        Some(path) => Ok(Arc::new(
            RecordReplayClient::new(ReplayMode::Record, path, Some(http)).map_err(CliError::usage)?,
        )),
        None => Ok(http),
    }
}

fn load_samples(path: &std::path::Path, format: Format) -> CliResult<Vec<SampleRecord>> {
    let format = match format {
        Format::Jsonl => DatasetFormat::Jsonl,
        Format::Json => DatasetFormat::Json,
    };
    load_dataset(path, format).map_err(|e| match e {
        DatasetError::Io { .. } => CliError::usage(e),
        other => CliError::runtime(other),
    })
}

fn prompt_style(s: Style) -> PromptStyle {
    match s {
        Style::Rl => PromptStyle::Rl,
        Style::Cot => PromptStyle::Cot,
        Style::Plain => PromptStyle::Plain,
    }
}

pub fn generate(ctx: &Ctx, args: GenerateArgs) -> CliResult {
    let mut cfg = match args.profile {
        Some(Profile::Paper) => GenConfig::paper(ctx.config.generate.seed),
        None => ctx.config.generate.clone(),
    };
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.samples_per_order {
        cfg.samples_per_order = n;
    }
    log_resolved("generate", &cfg);
    let splits = build_dataset(&cfg).map_err(|e| match e {
        GenError::Config(_) => CliError::usage(e),
        other => CliError::runtime(other),
    })?;
    type Rows = tomforge_core::generator::DatasetSplits;
    for (name, rows) in [
        ("train.jsonl", &splits.train),
        ("val.jsonl", &splits.val),
        ("test_ood.jsonl", &splits.test_ood),
    ] {
        write_jsonl(&args.out.join(name), &Rows::records(rows))?;
    }
    print_json(&json!({
        "seed": cfg.seed,
        "train": splits.train.len(),
        "val": splits.val.len(),
        "test_ood": splits.test_ood.len(),
    }))
}

pub fn answer(args: AnswerArgs) -> CliResult {
    let text = read_input(&args.story)?;
    let story = parse_story(text.trim()).map_err(CliError::runtime)?;
    let query = parse_question(&args.question).map_err(CliError::usage)?;
    let found = answer_query(&story, &query).map_err(CliError::runtime)?;
    if args.check {
        let other = brute_force_answer(&story, &query).map_err(CliError::runtime)?;
        if other != found {
            return Err(CliError::runtime(anyhow::anyhow!(
                "oracles disagree: {} vs {}",
                found,
                other
            )));
        }
    }
    println!("{}", found.surface(story.style));
    Ok(())
}

fn score_config(ctx: &Ctx, flags: &RewardFlags) -> ScoreConfig {
    ScoreConfig {
        implicit_think: flags.implicit_think || ctx.config.reward.implicit_think,
        strict: ctx.config.reward.strict && !flags.lenient,
    }
}

pub fn reward_score(ctx: &Ctx, args: RewardScoreArgs) -> CliResult {
    let cfg = score_config(ctx, &args.flags);
    log_resolved("reward score", &cfg);
    let requests: Vec<ScoreRequest> = parse_jsonl_rows(&args.input)?;
    let results: Vec<ScoreResult> = requests.iter().map(|r| r.score(cfg)).collect();
    write_jsonl(&args.out, &results)?;
    print_json(&json!({ "scored": results.len() }))
}

pub async fn reward_serve(ctx: &Ctx, args: RewardServeArgs) -> CliResult {
    let cfg = score_config(ctx, &args.flags);
    let host = args.host.unwrap_or_else(|| ctx.config.reward.host.clone());
    let port = args.port.unwrap_or(ctx.config.reward.port);
    log_resolved("reward serve", &json!({ "host": host, "port": port, "score": cfg }));
    let listener = service::bind(&format!("{host}:{port}")).await?;
    info!(addr = %listener.local_addr().map_err(CliError::runtime)?, "scoring service listening");
    service::serve(listener, cfg).await?;
    Ok(())
}

pub async fn eval(ctx: &Ctx, args: EvalArgs) -> CliResult {
    let samples = load_samples(&args.dataset, args.format)?;
    let mut opts = ctx.config.eval.clone();
    if let Some(s) = args.style {
        opts.style = prompt_style(s);
    }
    if let Some(c) = args.concurrency {
        opts.concurrency = c;
    }
    if let Some(m) = &args.endpoint.model {
        opts.model = m.clone();
    }
    if let Some(seed) = ctx.seed {
        opts.seed = seed;
    }
    opts.fail_fast |= args.fail_fast;
    if opts.concurrency == 0 {
        return Err(CliError::usage("--concurrency must be at least 1"));
    }
    log_resolved("eval", &opts);
    let client = endpoint_client(
        &ctx.config.client,
        args.endpoint.endpoint.as_deref(),
        args.endpoint.replay.as_ref(),
        args.endpoint.record.as_ref(),
    )?;
    let (records, report) = evaluate(client.as_ref(), &samples, &opts).await?;
    if let Some(path) = &args.records {
        write_jsonl(path, &records)?;
    }
    write_json(&args.out, &report)?;
    print_json(&json!({ "n": report.n, "accuracy": report.accuracy, "errors": report.errors }))
}

#[derive(Serialize)]
struct QuestionOut {
    question: String,
    answer: String,
}

#[derive(Serialize)]
struct AdversarialOut {
    search: SearchResult,
    story_text: String,
    questions: Vec<QuestionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    infilled: Option<String>,
}

pub async fn adversarial(ctx: &Ctx, args: AdversarialArgs) -> CliResult {
    let mut section = ctx.config.adversarial.clone();
    if let Some(path) = &args.context {
        section.context = serde_json::from_str::<SearchContext>(&read_input(path)?)
            .map_err(|e| CliError::usage(format!("invalid context {}: {e}", path.display())))?;
    }
    if let Some(s) = args.scorer {
        section.scorer = s;
    }
    let b = &mut section.budget;
    b.max_expansions = args.max_expansions.unwrap_or(b.max_expansions);
    b.max_depth = args.max_depth.unwrap_or(b.max_depth);
    b.beam = args.beam.unwrap_or(b.beam);
    b.min_depth = args.min_depth.unwrap_or(b.min_depth);
    log_resolved("adversarial", &section);

    let needs_client = section.scorer == ScorerKind::Model || args.infill;
    let client = if needs_client {
        Some(endpoint_client(
            &ctx.config.client,
            args.endpoint.endpoint.as_deref(),
            args.endpoint.replay.as_ref(),
            args.endpoint.record.as_ref(),
        )?)
    } else {
        None
    };
    let model = args.endpoint.model.clone().unwrap_or_default();

    let scorer: Box<dyn DifficultyScorer + Send> = match (section.scorer, &client) {
        (ScorerKind::Model, Some(c)) => Box::new(ModelScorer {
            client: c.clone(),
            handle: tokio::runtime::Handle::current(),
            model: model.clone(),
            style: PromptStyle::Rl,
        }),
        _ => Box::new(SyntheticScorer),
    };
    let context = section.context.clone();
    let budget = section.budget;
    let result = tokio::task::spawn_blocking(move || astar_search(&context, scorer.as_ref(), budget))
        .await
        .map_err(CliError::runtime)?
        .map_err(|e| match e {
            SearchError::Config(_) => CliError::usage(e),
            other => CliError::runtime(other),
        })?;

    let story = &result.story;
    let questions = result
        .questions
        .iter()
        .map(|q| {
            Ok(QuestionOut {
                question: render_question_in(q, story.style),
                answer: answer_query(story, q).map_err(CliError::runtime)?.surface(story.style),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let infilled = match (&client, args.infill) {
        (Some(c), true) => Some(infill_story(story, c.as_ref(), &model).await?.text),
        _ => None,
    };
    let out = AdversarialOut {
        story_text: render_story(story),
        questions,
        infilled,
        search: result,
    };
    write_json(&args.out, &out)?;
    print_json(&json!({
        "divergence_points": out.search.divergence_points,
        "score": out.search.score,
        "expansions": out.search.expansions,
        "exhausted": out.search.exhausted,
    }))
}

pub async fn judge(ctx: &Ctx, args: JudgeArgs) -> CliResult {
    let records: Vec<EvalRecord> = parse_jsonl_rows(&args.records)?;
    let mut cfg = ctx.config.judge.clone();
    if let Some(m) = args.model {
        cfg.model = m;
    }
    if let Some(c) = args.concurrency {
        cfg.concurrency = c;
    }
    log_resolved("judge", &cfg);
    let client = endpoint_client(
        &ctx.config.client,
        args.judge_endpoint.as_deref(),
        args.replay.as_ref(),
        args.record.as_ref(),
    )?;
    let inputs: Vec<JudgeInput> = records
        .iter()
        .map(|r| JudgeInput {
            sample_id: r.sample_id.clone(),
            story: r.story.clone(),
            question: r.question.clone(),
            answer: r.answer.clone(),
            thinking: TransferInput::from_eval_record(r).thinking,
        })
        .collect();
    let judged: Vec<JudgedRecord> = judge_all(client.as_ref(), &cfg, &inputs).await;
    write_jsonl(&args.out, &judged)?;
    let scored: Vec<f64> = judged.iter().filter_map(|j| j.result.as_ref().map(|r| r.quality)).collect();
    let mean = if scored.is_empty() {
        None
    } else {
        Some(scored.iter().sum::<f64>() / scored.len() as f64)
    };
    print_json(&json!({ "judged": scored.len(), "failed": judged.len() - scored.len(), "mean_quality": mean }))
}

pub async fn transfer(ctx: &Ctx, args: TransferArgs) -> CliResult {
    let records: Vec<EvalRecord> = parse_jsonl_rows(&args.records)?;
    let mut opts = ctx.config.transfer.clone();
    if let Some(m) = args.model {
        opts.model = m;
    }
    if let Some(c) = args.concurrency {
        opts.concurrency = c;
    }
    if args.strip_conclusion {
        opts.with_conclusion = false;
    }
    opts.fail_fast |= args.fail_fast;
    log_resolved("transfer", &opts);
    let client = endpoint_client(
        &ctx.config.client,
        args.target_endpoint.as_deref(),
        args.replay.as_ref(),
        args.record.as_ref(),
    )?;
    let inputs: Vec<TransferInput> = records.iter().map(TransferInput::from_eval_record).collect();
    let report = transfer_eval(client.as_ref(), &inputs, &opts).await?;
    write_json(&args.out, &report)?;
    print_json(&json!({ "n": report.n, "accuracy": report.accuracy, "empty_thinking": report.empty_thinking }))
}

pub fn audit(args: AuditArgs) -> CliResult {
    let samples = load_samples(&args.dataset, args.format)?;
    let report = tomforge_core::adversarial::audit_answer_bias(samples.iter().map(|s| s.answer.as_str()));
    match &args.out {
        Some(path) => write_json(path, &report),
        None => {
            println!("{}", serde_json::to_string_pretty(&report).map_err(CliError::runtime)?);
            Ok(())
        }
    }
}
