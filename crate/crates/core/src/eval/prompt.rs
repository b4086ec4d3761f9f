use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::client::ChatMessage;

/// System prompt used for RL-style evaluation.
pub const RL_SYSTEM_PROMPT: &str = "You are a helpful assistant. The assistant first thinks about the reasoning process in the mind and then provides the user with the answer. The reasoning process and answer are enclosed within <think> </think> and <answer> </answer> tags, respectively, i.e., <think> reasoning process here </think><answer> answer here </answer>. Now the user asks you to solve a Theory of Mind reasoning problem. After thinking, when you finally reach a conclusion, clearly state your answer within <answer> </answer> tags.\nNote: You should assume the following.\n(1) An agent witnesses everything and every movement before exiting a room.\n(2) An agent A can infer another agent B's mental state only if A and B have been in the same room, or have private or public interactions.";

/// System prompt used for chain-of-thought baselines and knowledge transfer.
pub const COT_SYSTEM_PROMPT: &str = "Read the following story and answer the question. Think step-by-step. Provide the thinking first, and then the answer. Answer in the following JSON format:\n{\n\"thinking\": \"step by step thinking\",\n\"answer\": \"answer text\"\n}";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    #[default]
    Rl,
    Cot,
    Plain,
}

impl PromptStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptStyle::Rl => "rl",
            PromptStyle::Cot => "cot",
            PromptStyle::Plain => "plain",
        }
    }

    pub fn system_prompt(self) -> Option<&'static str> {
        match self {
            PromptStyle::Rl => Some(RL_SYSTEM_PROMPT),
            PromptStyle::Cot => Some(COT_SYSTEM_PROMPT),
            PromptStyle::Plain => None,
        }
    }
}

impl fmt::Display for PromptStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rl" => Ok(PromptStyle::Rl),
            "cot" => Ok(PromptStyle::Cot),
            "plain" => Ok(PromptStyle::Plain),
            other => Err(format!("unknown prompt style {other:?} (expected rl, cot or plain)")),
        }
    }
}

pub fn user_content(story: &str, question: &str) -> String {
    format!("Story: {story}\n Question: {question}")
}

pub fn format_prompt(story: &str, question: &str, style: PromptStyle) -> Vec<ChatMessage> {
    let mut messages = Vec::with_capacity(2);
    if let Some(system) = style.system_prompt() {
        messages.push(ChatMessage::system(system));
    }
    messages.push(ChatMessage::user(user_content(story, question)));
    messages
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::Role;
    use crate::fixtures::{JEANS_QUESTION, JEANS_STORY};

    #[test]
    fn styles() {
        let rl = format_prompt(JEANS_STORY, JEANS_QUESTION, PromptStyle::Rl);
        assert_eq!(rl.len(), 2);
        assert!(rl[0]
            .content
            .contains("An agent witnesses everything and every movement before exiting a room."));
        assert!(rl[1].content.starts_with("Story: Amelia entered the hall."));
        assert!(rl[1].content.contains(".\n Question: Where does Amelia"));

        let cot = format_prompt(JEANS_STORY, JEANS_QUESTION, PromptStyle::Cot);
        assert!(cot[0].content.contains("\"thinking\""));

        let plain = format_prompt(JEANS_STORY, JEANS_QUESTION, PromptStyle::Plain);
        assert_eq!(plain.len(), 1);
        assert_eq!(plain[0].role, Role::User);
    }

    #[test]
    fn style_names_round_trip() {
        for s in [PromptStyle::Rl, PromptStyle::Cot, PromptStyle::Plain] {
            assert_eq!(s.as_str().parse::<PromptStyle>().unwrap(), s);
        }
        assert!("json".parse::<PromptStyle>().is_err());
    }
}
