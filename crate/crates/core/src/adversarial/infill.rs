use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ChatClient, ChatMessage, ChatRequest, ClientError};
use crate::story::{render_story, Story};

pub const INFILL_INSTRUCTION: &str = "Rewrite the story below as natural, flowing prose. Keep every event, in the same order, and mention every person, object and container by the exact name used in the story. Do not add new events or change where anything ends up. Reply with the rewritten story only.";

#[derive(Debug, Error)]
pub enum InfillError {
    #[error("rewrite dropped required tokens: {missing_tokens:?}")]
    InfillRejected { missing_tokens: Vec<String> },
    #[error(transparent)]
    Client(#[from] ClientError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infilled {
    pub text: String,
    pub story: Story,
}

/// Surface forms of every agent, object and container, with underscores
/// shown as spaces.
pub fn required_tokens(story: &Story) -> Vec<String> {
    let agents = story.agents.iter().map(|a| a.as_str());
    let objects = story.objects.iter().map(|o| o.as_str());
    let containers = story.containers.iter().map(|c| c.as_str());
    agents
        .chain(objects)
        .chain(containers)
        .map(|t| t.replace('_', " "))
        .collect()
}

/// Required tokens absent from `text`, compared case-insensitively.
pub fn missing_tokens(story: &Story, text: &str) -> Vec<String> {
    let hay = text.to_lowercase();
    required_tokens(story)
        .into_iter()
        .filter(|t| !hay.contains(&t.to_lowercase()))
        .collect()
}

pub async fn infill_story<C: ChatClient + ?Sized>(
    story: &Story,
    client: &C,
    model: &str,
) -> Result<Infilled, InfillError> {
    let request = ChatRequest::new(
        model,
        vec![
            ChatMessage::system(INFILL_INSTRUCTION),
            ChatMessage::user(render_story(story)),
        ],
    );
    let text = client.chat(&request).await?.content;
    let missing = missing_tokens(story, &text);
    if !missing.is_empty() {
        return Err(InfillError::InfillRejected {
            missing_tokens: missing,
        });
    }
    Ok(Infilled {
        text,
        story: story.clone(),
    })
}
