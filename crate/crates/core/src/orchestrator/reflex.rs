use super::messages::REFLEX_NAME;
use super::{Instruction, Orchestrator, TurnContext};

type Condition = Box<dyn Fn(&str) -> bool + Send>;

/// Fires a fixed instruction whenever a predicate over the partner's last
/// utterance holds. On the opening turn the predicate sees `""`.
pub struct SimpleReflex {
    name: String,
    condition: Condition,
    instruction: String,
    persist: bool,
}

impl SimpleReflex {
    pub fn new(
        condition: impl Fn(&str) -> bool + Send + 'static,
        instruction: impl Into<String>,
    ) -> Self {
        SimpleReflex {
            name: REFLEX_NAME.to_string(),
            condition: Box::new(condition),
            instruction: instruction.into(),
            persist: false,
        }
    }

    /// Case-insensitive substring trigger.
    pub fn contains(keyword: impl Into<String>, instruction: impl Into<String>) -> Self {
        let keyword = keyword.into().to_lowercase();
        Self::new(move |u| u.to_lowercase().contains(&keyword), instruction)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn persistent(mut self, persist: bool) -> Self {
        self.persist = persist;
        self
    }
}

impl Orchestrator for SimpleReflex {
    fn name(&self) -> &str {
        &self.name
    }

    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
        let last = ctx.last_utterance.unwrap_or("");
        (self.condition)(last)
            .then(|| Instruction::new(&self.name, &self.instruction).persistent(self.persist))
    }
}
