//! Text-completion backends.
//!
//! Everything that talks to a model goes through [`Backend::complete`]. Two
//! implementations ship here: [`ScriptedBackend`], a deterministic test
//! double, and [`HttpBackend`], a client for OpenAI-compatible
//! `/chat/completions` endpoints.

mod http;
mod scripted;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use http::{HttpBackend, API_KEY_ENV, BASE_URL_ENV, DEFAULT_TIMEOUT};
pub use scripted::ScriptedBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        write!(f, "[{role}] {}", self.content)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplingParams {
    pub seed: Option<u64>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            seed: None,
            temperature: 1.0,
            max_tokens: 512,
        }
    }
}

/// A source of assistant completions.
///
/// Implementations must be shareable across threads; concurrent calls are
/// independent requests.
pub trait Backend: Send + Sync {
    /// Produces one assistant utterance for the conversation so far.
    fn complete(&self, messages: &[Message], params: &SamplingParams) -> Result<String>;

    /// Model identifier recorded on generated dialogs.
    fn model_name(&self) -> &str;
}
