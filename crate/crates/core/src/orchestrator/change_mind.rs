use rand::Rng;

use super::messages::{CHANGE_MIND, CHANGE_MIND_NAME, CHANGE_MIND_WITH_REASON};
use super::{Instruction, Orchestrator, TurnContext};
use crate::error::{Error, Result};

/// Randomly tells the agent to change its mind, at most `max_times` per
/// dialog.
///
/// One probability draw is made from the agent's rng on every turn, even
/// after the budget is spent, so the rng stream does not depend on how
/// often this fired. A second draw picks the reason when it fires.
#[derive(Debug, Clone)]
pub struct ChangeMind {
    probability: f64,
    reasons: Vec<String>,
    max_times: usize,
    fired: usize,
    text: String,
    reason_text: String,
    persist: bool,
}

impl ChangeMind {
    pub fn new<I, S>(probability: f64, reasons: I, max_times: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::Config(format!(
                "change-mind probability must be within [0, 1], got {probability}"
            )));
        }
        if max_times == 0 {
            return Err(Error::Config(
                "change-mind max_times must be positive".into(),
            ));
        }
        Ok(ChangeMind {
            probability,
            reasons: reasons.into_iter().map(Into::into).collect(),
            max_times,
            fired: 0,
            text: CHANGE_MIND.to_string(),
            reason_text: CHANGE_MIND_WITH_REASON.to_string(),
            persist: false,
        })
    }

    /// Overrides the instruction texts. `with_reason` may contain `{reason}`.
    pub fn with_text(mut self, plain: impl Into<String>, with_reason: impl Into<String>) -> Self {
        self.text = plain.into();
        self.reason_text = with_reason.into();
        self
    }

    pub fn persistent(mut self, persist: bool) -> Self {
        self.persist = persist;
        self
    }

    pub fn fire_count(&self) -> usize {
        self.fired
    }
}

impl Orchestrator for ChangeMind {
    fn name(&self) -> &str {
        CHANGE_MIND_NAME
    }

    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
        let draw: f64 = ctx.rng.random();
        if self.fired >= self.max_times || draw >= self.probability {
            return None;
        }
        self.fired += 1;
        let text = if self.reasons.is_empty() {
            self.text.clone()
        } else {
            let reason = &self.reasons[ctx.rng.random_range(0..self.reasons.len())];
            self.reason_text.replace("{reason}", reason)
        };
        Some(Instruction::new(CHANGE_MIND_NAME, text).persistent(self.persist))
    }

    fn reset(&mut self) {
        self.fired = 0;
    }
}
