use std::collections::BTreeMap;

use super::messages::INSTRUCTION_LIST_NAME;
use super::{Instruction, Orchestrator, TurnContext};

/// Fires `plan[i]` when the owning agent is about to produce its i-th
/// utterance (0-based, counted over its own turns only).
#[derive(Debug, Clone, Default)]
pub struct InstructionList {
    plan: BTreeMap<usize, String>,
    persist: bool,
}

impl InstructionList {
    pub fn new<I, S>(plan: I) -> Self
    where
        I: IntoIterator<Item = (usize, S)>,
        S: Into<String>,
    {
        InstructionList {
            plan: plan.into_iter().map(|(k, v)| (k, v.into())).collect(),
            persist: false,
        }
    }

    /// Plan whose i-th entry fires on the agent's i-th turn.
    pub fn sequence<I, S>(steps: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(steps.into_iter().enumerate())
    }

    pub fn persistent(mut self, persist: bool) -> Self {
        self.persist = persist;
        self
    }
}

impl Orchestrator for InstructionList {
    fn name(&self) -> &str {
        INSTRUCTION_LIST_NAME
    }

    fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
        let own_turn = ctx
            .dialog
            .turns
            .iter()
            .filter(|t| t.speaker == ctx.agent)
            .count();
        self.plan
            .get(&own_turn)
            .map(|text| Instruction::new(INSTRUCTION_LIST_NAME, text).persistent(self.persist))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orchestrator::test_support::{dialog_of_len, fire, rng};

    #[test]
    fn counts_own_turns_only() {
        let mut o = InstructionList::new([(0, "a"), (2, "b")]);
        // In dialog_of_len, agent "B" speaks at odd positions.
        let hits: Vec<Option<String>> = [0usize, 2, 4]
            .iter()
            .map(|&len| {
                fire(&mut o, &dialog_of_len(len + 1), Some("x"), "B", &mut rng(0)).map(|i| i.text)
            })
            .collect();
        assert_eq!(hits, [Some("a".into()), None, Some("b".into())]);
    }

    #[test]
    fn empty_plan_is_quiet() {
        let mut o = InstructionList::default();
        for len in 0..6 {
            assert!(fire(&mut o, &dialog_of_len(len), None, "A", &mut rng(0)).is_none());
        }
    }

    #[test]
    fn greets_on_first_turn() {
        let mut o = InstructionList::sequence(["Greet warmly"]);
        let got = fire(&mut o, &dialog_of_len(0), None, "A", &mut rng(0)).unwrap();
        assert_eq!(got.text, "Greet warmly");
        assert!(fire(&mut o, &dialog_of_len(2), None, "A", &mut rng(0)).is_none());
    }
}
