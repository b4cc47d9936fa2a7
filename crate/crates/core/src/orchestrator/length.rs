use super::messages::{LENGTH_CONTINUE, LENGTH_FINISH, LENGTH_NAME};
use super::{Instruction, Orchestrator, TurnContext};
use crate::error::{Error, Result};
use crate::persona::END_MARKER;

/// Keeps the dialog length between `min` and `max` turns.
///
/// Below `min` every turn gets a "keep going" instruction; from `max` on
/// every turn gets a "finish now" instruction.
#[derive(Debug, Clone)]
pub struct Length {
    min: usize,
    max: usize,
    continue_text: String,
    finish_text: String,
    persist: bool,
}

impl Length {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || max == 0 {
            return Err(Error::Config("length bounds must be positive".into()));
        }
        if min > max {
            return Err(Error::Config(format!(
                "length orchestrator min ({min}) exceeds max ({max})"
            )));
        }
        Ok(Length {
            min,
            max,
            continue_text: LENGTH_CONTINUE.to_string(),
            finish_text: LENGTH_FINISH.replace("{end}", END_MARKER),
            persist: false,
        })
    }

    pub fn with_continue_text(mut self, text: impl Into<String>) -> Self {
        self.continue_text = text.into();
        self
    }

    pub fn with_finish_text(mut self, text: impl Into<String>) -> Self {
        self.finish_text = text.into();
        self
    }

    /// Rewrites the default finish text for a non-default end marker.
    pub fn with_end_marker(mut self, marker: &str) -> Self {
        self.finish_text = LENGTH_FINISH.replace("{end}", marker);
        self
    }

    pub fn persistent(mut self, persist: bool) -> Self {
        self.persist = persist;
        self
    }
}

impl Orchestrator for Length {
    fn name(&self) -> &str {
        LENGTH_NAME
    }

    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
        let len = ctx.dialog.len();
        let text = if len < self.min {
            &self.continue_text
        } else if len >= self.max {
            &self.finish_text
        } else {
            return None;
        };
        Some(Instruction::new(LENGTH_NAME, text).persistent(self.persist))
    }
}
