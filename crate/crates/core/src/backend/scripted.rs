use std::sync::Mutex;

use super::{Backend, Message, SamplingParams};
use crate::error::{Error, Result};

/// Returns pre-written completions in order, ignoring the prompt.
#[derive(Debug)]
pub struct ScriptedBackend {
    script: Vec<String>,
    cycle: bool,
    model: String,
    cursor: Mutex<usize>,
}

impl ScriptedBackend {
    /// With `cycle` the script wraps around instead of running out. An empty
    /// cycling script behaves like an exhausted one.
    pub fn new<I, S>(script: I, cycle: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedBackend {
            script: script.into_iter().map(Into::into).collect(),
            cycle,
            model: "scripted".to_string(),
            cursor: Mutex::new(0),
        }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    /// Number of completions handed out so far.
    pub fn calls(&self) -> usize {
        *self.cursor.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, _messages: &[Message], _params: &SamplingParams) -> Result<String> {
        let mut cursor = self.cursor.lock().unwrap_or_else(|e| e.into_inner());
        let idx = if self.cycle && !self.script.is_empty() {
            *cursor % self.script.len()
        } else {
            *cursor
        };
        let reply = self.script.get(idx).ok_or(Error::BackendExhausted)?.clone();
        *cursor += 1;
        if reply.trim().is_empty() {
            return Err(Error::EmptyCompletion);
        }
        Ok(reply)
    }

    fn model_name(&self) -> &str {
        &self.model
    }
}
