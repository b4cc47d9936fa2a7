use std::fmt::Write;

use super::messages::{SIMPLE_RESPONSE_NAME, SUGGESTED_RESPONSES};
use super::{Instruction, Orchestrator, TurnContext};
use crate::error::{Error, Result};
use crate::flow::{Embedder, HashedTf, UtteranceVector};

/// Suggests the `top_k` candidate responses most similar to the partner's
/// last utterance.
pub struct SimpleResponse {
    candidates: Vec<String>,
    vectors: Vec<UtteranceVector>,
    top_k: usize,
    embedder: Box<dyn Embedder>,
    header: String,
}

impl SimpleResponse {
    pub fn new<I, S>(candidates: I, top_k: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_embedder(candidates, top_k, Box::new(HashedTf))
    }

    pub fn with_embedder<I, S>(
        candidates: I,
        top_k: usize,
        embedder: Box<dyn Embedder>,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let candidates: Vec<String> = candidates.into_iter().map(Into::into).collect();
        if candidates.is_empty() {
            return Err(Error::Config(
                "simple-response needs at least one candidate".into(),
            ));
        }
        if top_k == 0 || top_k > candidates.len() {
            return Err(Error::Config(format!(
                "top_k must be within 1..={}, got {top_k}",
                candidates.len()
            )));
        }
        let vectors = candidates.iter().map(|c| embedder.embed(c)).collect();
        Ok(SimpleResponse {
            candidates,
            vectors,
            top_k,
            embedder,
            header: SUGGESTED_RESPONSES.to_string(),
        })
    }

    pub fn with_header(mut self, header: impl Into<String>) -> Self {
        self.header = header.into();
        self
    }

    /// Candidate indices by descending similarity; ties keep list order.
    pub fn rank(&self, utterance: &str) -> Vec<(usize, f64)> {
        let query = self.embedder.embed(utterance);
        let mut scored: Vec<(usize, f64)> = self
            .vectors
            .iter()
            .map(|v| query.cosine(v))
            .enumerate()
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        scored
    }

    pub fn suggestions(&self, utterance: &str) -> Vec<&str> {
        self.rank(utterance)
            .into_iter()
            .take(self.top_k)
            .map(|(i, _)| self.candidates[i].as_str())
            .collect()
    }
}

impl Orchestrator for SimpleResponse {
    fn name(&self) -> &str {
        SIMPLE_RESPONSE_NAME
    }

    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
        let last = ctx.last_utterance?;
        let mut text = self.header.clone();
        for (n, suggestion) in self.suggestions(last).into_iter().enumerate() {
            let _ = write!(text, "\n{}. {suggestion}", n + 1);
        }
        Some(Instruction::new(SIMPLE_RESPONSE_NAME, text))
    }
}
