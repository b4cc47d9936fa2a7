use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};
use url::Url;

use super::{Backend, Message, SamplingParams};
use crate::error::{Error, Result, WireError};

pub const API_KEY_ENV: &str = "DIALOGFORGE_API_KEY";
pub const BASE_URL_ENV: &str = "DIALOGFORGE_BASE_URL";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

const BODY_EXCERPT: usize = 512;

/// Client for an OpenAI-compatible chat-completions endpoint.
///
/// Seeds are forwarded when set; whether the server honors them is up to
/// the server.
pub struct HttpBackend {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    timeout: Duration,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("timeout", &self.timeout)
            .finish()
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

impl HttpBackend {
    /// `api_key` falls back to `DIALOGFORGE_API_KEY` when absent.
    pub fn new(base_url: &str, model: impl Into<String>, api_key: Option<String>) -> Result<Self> {
        let parsed = Url::parse(base_url)
            .map_err(|e| Error::Config(format!("invalid base URL {base_url:?}: {e}")))?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(Error::Config(format!(
                "base URL must be http(s), got {base_url:?}"
            )));
        }
        let api_key = api_key
            .or_else(|| std::env::var(API_KEY_ENV).ok())
            .filter(|k| !k.is_empty());
        Ok(HttpBackend {
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            model: model.into(),
            api_key,
            timeout: DEFAULT_TIMEOUT,
            agent: build_agent(DEFAULT_TIMEOUT),
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self.agent = build_agent(timeout);
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, body: &ChatRequest<'_>) -> Result<String, Attempt> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| self.classify(e))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| self.classify(e))?;
        if !(200..300).contains(&status) {
            let body: String = text.chars().take(BODY_EXCERPT).collect();
            return Err(Attempt::Final(WireError::Status { status, body }));
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Attempt::Final(WireError::Decode(e.to_string())))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Attempt::Final(WireError::Decode("response has no choices".into())))
    }

    fn classify(&self, err: ureq::Error) -> Attempt {
        match err {
            ureq::Error::Timeout(_) => Attempt::Retryable(WireError::Timeout(self.timeout)),
            ureq::Error::Json(e) => Attempt::Final(WireError::Decode(e.to_string())),
            other => Attempt::Retryable(WireError::Transport(other.to_string())),
        }
    }
}

enum Attempt {
    Retryable(WireError),
    Final(WireError),
}

fn build_agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(timeout))
        .build()
        .into()
}

impl Backend for HttpBackend {
    fn complete(&self, messages: &[Message], params: &SamplingParams) -> Result<String> {
        let body = ChatRequest {
            model: &self.model,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            seed: params.seed,
        };
        let content = match self.attempt(&body) {
            Ok(content) => content,
            Err(Attempt::Final(e)) => return Err(e.into()),
            Err(Attempt::Retryable(e)) => {
                warn!(error = %e, endpoint = %self.endpoint, "transport failure, retrying once");
                match self.attempt(&body) {
                    Ok(content) => content,
                    Err(Attempt::Final(e) | Attempt::Retryable(e)) => return Err(e.into()),
                }
            }
        };
        debug!(chars = content.len(), "completion received");
        if content.trim().is_empty() {
            return Err(Error::EmptyCompletion);
        }
        Ok(content)
    }

    fn model_name(&self) -> &str {
        &self.model
    }
}
