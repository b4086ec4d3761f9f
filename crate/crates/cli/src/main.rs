mod args;
mod commands;
mod config;
mod error;
mod io;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use tracing_subscriber::EnvFilter;

use args::{Cli, Command, RewardCommand};
use commands::Ctx;
use config::CliConfig;
use error::{CliError, CliResult};

fn report(err: &CliError, json_errors: bool) {
    if json_errors {
        let body = json!({
            "error": format!("{:#}", err.error),
            "kind": err.kind(),
            "exit_code": err.code,
        });
        eprintln!("{body}");
    } else {
        eprintln!("error: {:#}", err.error);
    }
}

fn init_logging(level: &str) -> CliResult {
    let filter = EnvFilter::try_new(level)
        .map_err(|e| CliError::usage(format!("invalid --log-level {level:?}: {e}")))?;
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init()
        .map_err(|e| CliError::runtime(anyhow::anyhow!("{e}")))
}

async fn run(cli: Cli) -> CliResult {
    init_logging(&cli.log_level)?;
    let ctx = Ctx {
        config: CliConfig::load(cli.config.as_deref())?,
        seed: cli.seed,
    };
    match cli.command {
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Answer(a) => commands::answer(a),
        Command::Reward(RewardCommand::Score(a)) => commands::reward_score(&ctx, a),
        Command::Reward(RewardCommand::Serve(a)) => commands::reward_serve(&ctx, a).await,
        Command::Eval(a) => commands::eval(&ctx, a).await,
        Command::Adversarial(a) => commands::adversarial(&ctx, a).await,
        Command::Judge(a) => commands::judge(&ctx, a).await,
        Command::Transfer(a) => commands::transfer(&ctx, a).await,
        Command::Audit(a) => commands::audit(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--json-errors") {
                report(&CliError::usage(e.kind().to_string()), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    let json_errors = cli.json_errors;
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            report(&CliError::runtime(e), json_errors);
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report(&err, json_errors);
            ExitCode::from(err.code as u8)
        }
    }
}
