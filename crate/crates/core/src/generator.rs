//! Dialog generators: one-shot generation from a brief, and the agentic
//! persona-pair generator.

use std::sync::Arc;

use rand::Rng;
use serde::Deserialize;
use tracing::warn;

use crate::agent::{dialog_with, Agent, DialogOptions};
use crate::backend::{Backend, Message, SamplingParams};
use crate::dialog::Dialog;
use crate::error::{Error, Result};
use crate::persona::{Persona, PromptOptions};

const REPAIR_ADDENDUM: &str = "Your previous answer did not follow the required format. \
Reply again with ONLY the JSON array of {\"speaker\", \"text\"} objects, nothing else.";

/// What a one-shot generated conversation should be about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationBrief {
    pub details: String,
    pub speaker_a: String,
    pub speaker_b: String,
    /// Number of dialogs [`generate_dialogs`] produces, one completion each.
    pub example_count: usize,
}

impl GenerationBrief {
    pub fn new(
        details: impl Into<String>,
        speaker_a: impl Into<String>,
        speaker_b: impl Into<String>,
    ) -> Self {
        GenerationBrief {
            details: details.into(),
            speaker_a: speaker_a.into(),
            speaker_b: speaker_b.into(),
            example_count: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.details.trim().is_empty() {
            return Err(Error::Config("generation brief has no details".into()));
        }
        if self.speaker_a.trim().is_empty() || self.speaker_b.trim().is_empty() {
            return Err(Error::Config("speaker labels must not be empty".into()));
        }
        if self.speaker_a == self.speaker_b {
            return Err(Error::DuplicateAgentName(self.speaker_a.clone()));
        }
        if self.example_count == 0 {
            return Err(Error::Config("example_count must be positive".into()));
        }
        Ok(())
    }

    fn system_prompt(&self) -> String {
        format!(
            "You write realistic conversations between two speakers, \"{a}\" and \"{b}\".\n\
             Output ONLY a JSON array in which each element is an object \
             {{\"speaker\": <\"{a}\" or \"{b}\">, \"text\": <utterance>}}, one element per turn, \
             in order. Do not add any commentary before or after the array.",
            a = self.speaker_a,
            b = self.speaker_b
        )
    }
}

#[derive(Deserialize)]
struct RawTurn {
    speaker: String,
    text: String,
}

/// Generates one dialog with a single completion (plus at most one repair
/// re-ask when the answer does not parse).
pub fn generate_dialog(
    backend: &dyn Backend,
    brief: &GenerationBrief,
    seed: Option<u64>,
) -> Result<Dialog> {
    brief.validate()?;
    let seed = seed.unwrap_or_else(|| rand::rng().random());
    let params = SamplingParams {
        seed: Some(seed),
        ..Default::default()
    };
    let mut messages = vec![
        Message::system(brief.system_prompt()),
        Message::user(brief.details.clone()),
    ];

    let first = backend.complete(&messages, &params)?;
    let turns = match parse_turns(&first, brief) {
        Ok(turns) => turns,
        Err(reason) => {
            warn!(%reason, "generated dialog off-schema, asking for a repair");
            messages.push(Message::assistant(first));
            messages.push(Message::user(REPAIR_ADDENDUM));
            let second = backend.complete(&messages, &params)?;
            parse_turns(&second, brief).map_err(|reason| Error::SchemaViolation {
                reason,
                raw: second.clone(),
            })?
        }
    };

    let mut dialog = Dialog::new();
    dialog.seed = Some(seed);
    dialog.model = Some(backend.model_name().to_string());
    for turn in turns {
        dialog.append_utterance(turn.speaker, turn.text, 0)?;
    }
    Ok(dialog)
}

/// `brief.example_count` dialogs with seeds `seed, seed + 1, …` and ids
/// `0, 1, …`.
pub fn generate_dialogs(
    backend: &dyn Backend,
    brief: &GenerationBrief,
    seed: u64,
) -> Result<Vec<Dialog>> {
    brief.validate()?;
    (0..brief.example_count)
        .map(|i| {
            let mut d = generate_dialog(backend, brief, Some(seed.wrapping_add(i as u64)))?;
            d.id = Some(i as u64);
            Ok(d)
        })
        .collect()
}

fn parse_turns(raw: &str, brief: &GenerationBrief) -> std::result::Result<Vec<RawTurn>, String> {
    // Models like to wrap JSON in prose or code fences; take the outermost array.
    let start = raw.find('[').ok_or("no JSON array in completion")?;
    let end = raw.rfind(']').ok_or("no JSON array in completion")?;
    if end < start {
        return Err("no JSON array in completion".into());
    }
    let turns: Vec<RawTurn> =
        serde_json::from_str(&raw[start..=end]).map_err(|e| format!("invalid turn array: {e}"))?;
    if turns.is_empty() {
        return Err("turn array is empty".into());
    }
    if let Some(t) = turns
        .iter()
        .find(|t| t.speaker != brief.speaker_a && t.speaker != brief.speaker_b)
    {
        return Err(format!("unexpected speaker {:?}", t.speaker));
    }
    Ok(turns)
}

/// Runs an agentic dialog between two personas sharing `backend`. The first
/// persona opens and is asked to greet.
pub fn persona_dialog(
    backend: Arc<dyn Backend>,
    a: &Persona,
    b: &Persona,
    seed: Option<u64>,
) -> Result<Dialog> {
    if a.name == b.name {
        return Err(Error::DuplicateAgentName(a.name.clone()));
    }
    let greeting = PromptOptions {
        begin_with_greeting: true,
        ..Default::default()
    };
    let mut first = Agent::new(backend.clone(), a.clone())?.with_prompt_options(greeting);
    let mut second = Agent::new(backend, b.clone())?;
    dialog_with(
        &mut first,
        &mut second,
        &DialogOptions {
            seed,
            ..Default::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ScriptedBackend;

    fn brief() -> GenerationBrief {
        GenerationBrief::new(
            "Generate a conversation between a customer and a barista about ordering coffee.",
            "Customer",
            "Barista",
        )
    }

    const VALID: &str = r#"[{"speaker":"Customer","text":"A latte, please."},
                            {"speaker":"Barista","text":"Coming right up!"}]"#;

    #[test]
    fn parses_valid_array() {
        let backend = ScriptedBackend::new([VALID], false).with_model("llama2");
        let d = generate_dialog(&backend, &brief(), Some(4)).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.seed, Some(4));
        assert_eq!(d.model.as_deref(), Some("llama2"));
        assert!(d
            .turns
            .iter()
            .all(|t| t.speaker == "Customer" || t.speaker == "Barista"));
        assert!(d.events.iter().all(|e| e.timestamp == 0));
        d.validate().unwrap();
    }

    #[test]
    fn accepts_fenced_output() {
        let fenced = format!("Here you go:\n```json\n{VALID}\n```");
        let backend = ScriptedBackend::new([fenced], false);
        assert_eq!(
            generate_dialog(&backend, &brief(), Some(1)).unwrap().len(),
            2
        );
    }

    #[test]
    fn repairs_once() {
        let backend = ScriptedBackend::new(["Sure! Here is a dialog.", VALID], false);
        let d = generate_dialog(&backend, &brief(), Some(1)).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn prose_twice_is_schema_violation() {
        let backend = ScriptedBackend::new(["just prose", "still prose"], false);
        match generate_dialog(&backend, &brief(), Some(1)) {
            Err(Error::SchemaViolation { raw, .. }) => assert_eq!(raw, "still prose"),
            other => panic!("expected schema violation, got {other:?}"),
        }
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn off_schema_speaker_rejected() {
        let bad = r#"[{"speaker":"Narrator","text":"Once upon a time"}]"#;
        let backend = ScriptedBackend::new([bad, bad], false);
        assert!(matches!(
            generate_dialog(&backend, &brief(), None),
            Err(Error::SchemaViolation { .. })
        ));
    }

    #[test]
    fn seed_is_always_recorded() {
        let backend = ScriptedBackend::new([VALID], false);
        assert!(generate_dialog(&backend, &brief(), None)
            .unwrap()
            .seed
            .is_some());
    }

    #[test]
    fn many_dialogs_get_ids_and_seeds() {
        let backend = ScriptedBackend::new([VALID], true);
        let mut b = brief();
        b.example_count = 3;
        let ds = generate_dialogs(&backend, &b, 10).unwrap();
        let meta: Vec<_> = ds.iter().map(|d| (d.id, d.seed)).collect();
        assert_eq!(
            meta,
            [
                (Some(0), Some(10)),
                (Some(1), Some(11)),
                (Some(2), Some(12))
            ]
        );
    }

    #[test]
    fn brief_validation() {
        assert!(GenerationBrief::new("", "A", "B").validate().is_err());
        assert!(GenerationBrief::new("x", "A", "A").validate().is_err());
    }

    #[test]
    fn persona_pair_alternates() {
        let backend: Arc<dyn Backend> = Arc::new(ScriptedBackend::new(
            [
                "Good morning! What can I get you?",
                "A cappuccino, please.",
                "Here you go! [END]",
            ],
            false,
        ));
        let alice = Persona::new("Alice").role("barista");
        let bob = Persona::new("Bob").role("customer");
        let d = persona_dialog(backend, &alice, &bob, Some(2)).unwrap();
        let speakers: Vec<_> = d.turns.iter().map(|t| t.speaker.as_str()).collect();
        assert_eq!(speakers, ["Alice", "Bob", "Alice"]);
        let personas = d.personas.as_ref().unwrap();
        assert_eq!(personas["Alice"].role.as_deref(), Some("barista"));
        assert_eq!(personas["Bob"].role.as_deref(), Some("customer"));
        assert_eq!(d.seed, Some(2));
    }

    #[test]
    fn persona_pair_duplicate_names() {
        let backend: Arc<dyn Backend> = Arc::new(ScriptedBackend::new(["x"], true));
        let p = Persona::new("Alice");
        assert!(matches!(
            persona_dialog(backend, &p, &p, None),
            Err(Error::DuplicateAgentName(_))
        ));
    }
}
