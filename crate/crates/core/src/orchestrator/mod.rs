//! Orchestrators: per-agent policies that may inject an instruction right
//! before the agent produces its next utterance.
//!
//! An orchestrator is queried once per agent turn through
//! [`Orchestrator::instruct`]. Whatever it returns is placed in the agent's
//! memory as a system message and recorded on the dialog as an `instruct`
//! event labeled with the orchestrator's name. Orchestrators attach to an
//! agent with `agent | orchestrator` and fire in attachment order.

mod change_mind;
mod instruction_list;
mod length;
pub mod messages;
mod reflex;
mod simple_response;

use rand::RngCore;

use crate::dialog::Dialog;

pub use change_mind::ChangeMind;
pub use instruction_list::InstructionList;
pub use length::Length;
pub use reflex::SimpleReflex;
pub use simple_response::SimpleResponse;

/// An instruction produced by an orchestrator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub text: String,
    /// Stays in the agent's memory after the turn when true.
    pub persist: bool,
    /// Name of the emitting orchestrator.
    pub label: String,
}

impl Instruction {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        Instruction {
            text: text.into(),
            persist: false,
            label: label.into(),
        }
    }

    pub fn persistent(mut self, persist: bool) -> Self {
        self.persist = persist;
        self
    }
}

/// What an orchestrator sees when its agent is about to speak.
pub struct TurnContext<'a> {
    /// The conversation so far.
    pub dialog: &'a Dialog,
    /// The partner's last utterance; `None` when the agent opens.
    pub last_utterance: Option<&'a str>,
    /// Name of the owning agent.
    pub agent: &'a str,
    /// The owning agent's seeded random source.
    pub rng: &'a mut dyn RngCore,
}

pub trait Orchestrator: Send {
    fn name(&self) -> &str;

    /// Returns an instruction to inject this turn, or `None` to stay quiet.
    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction>;

    /// Clears per-dialog state. Called whenever the owning agent is reset.
    fn reset(&mut self) {}
}

impl<O: Orchestrator + ?Sized> Orchestrator for Box<O> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
        (**self).instruct(ctx)
    }

    fn reset(&mut self) {
        (**self).reset()
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Runs `instruct` once against `dialog`.
    pub fn fire(
        orch: &mut dyn Orchestrator,
        dialog: &Dialog,
        last: Option<&str>,
        agent: &str,
        rng: &mut ChaCha8Rng,
    ) -> Option<Instruction> {
        let mut ctx = TurnContext {
            dialog,
            last_utterance: last,
            agent,
            rng,
        };
        orch.instruct(&mut ctx)
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn dialog_of_len(n: usize) -> Dialog {
        let mut d = Dialog::new();
        for i in 0..n {
            let speaker = if i % 2 == 0 { "A" } else { "B" };
            d.append_utterance(speaker, format!("turn {i}"), 0).unwrap();
        }
        d
    }
}
