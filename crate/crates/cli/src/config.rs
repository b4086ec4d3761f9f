use std::path::Path;

use serde::{Deserialize, Serialize};
use tomforge_core::adversarial::{Budget, SearchContext};
use tomforge_core::client::HttpConfig;
use tomforge_core::eval::EvalOptions;
use tomforge_core::generator::GenConfig;
use tomforge_core::judge::{JudgeConfig, TransferOptions};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub implicit_think: bool,
    pub strict: bool,
    pub host: String,
    pub port: u16,
}

impl Default for RewardSection {
    fn default() -> Self {
        RewardSection {
            implicit_think: false,
            strict: true,
            host: "127.0.0.1".into(),
            port: 8731,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Synthetic,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversarialSection {
    pub budget: Budget,
    pub context: SearchContext,
    pub scorer: ScorerKind,
}

impl Default for AdversarialSection {
    fn default() -> Self {
        AdversarialSection {
            budget: Budget::default(),
            context: SearchContext::three_agent(),
            scorer: ScorerKind::Synthetic,
        }
    }
}

/// Shared configuration file; command-line flags override its values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub generate: GenConfig,
    pub reward: RewardSection,
    pub eval: EvalOptions,
    pub adversarial: AdversarialSection,
    pub judge: JudgeConfig,
    pub transfer: TransferOptions,
    pub client: HttpConfig,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(CliConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}
