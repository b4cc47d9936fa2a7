//! Dialogue data model: turns, the event audit trail and the `Dialog`
//! container, plus structured/plain serialization and file I/O.
//!
//! A `Dialog` keeps two views of the conversation. `turns` is what was said;
//! `events` is everything that happened, in order, including instructions
//! injected by orchestrators. The `utter` events always mirror `turns`
//! one-to-one, and every mutating method keeps it that way.

mod plain;
mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::persona::Persona;

pub use render::{render_dialog, RenderOptions};

/// Version tag written into every structured file.
pub const FORMAT_VERSION: &str = "1";

/// A single utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub text: String,
}

impl Turn {
    /// Builds a turn, stripping one trailing line break from `text`.
    pub fn new(speaker: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let speaker = speaker.into();
        if speaker.trim().is_empty() {
            return Err(Error::EmptySpeaker);
        }
        Ok(Turn {
            speaker,
            text: strip_trailing_newline(text.into()),
        })
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.speaker, self.text)
    }
}

fn strip_trailing_newline(mut text: String) -> String {
    if text.ends_with('\n') {
        text.pop();
        if text.ends_with('\r') {
            text.pop();
        }
    }
    text
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Utter,
    Instruct,
    PickSuggestion,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Utter => "utter",
            Action::Instruct => "instruct",
            Action::PickSuggestion => "pick_suggestion",
        })
    }
}

/// Timestamped record of something an agent did or was told.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Event {
    pub agent: String,
    pub action: Action,
    pub action_label: Option<String>,
    pub text: String,
    /// Unix epoch seconds; 0 means unknown.
    pub timestamp: i64,
}

impl Event {
    pub fn utter(agent: impl Into<String>, text: impl Into<String>, timestamp: i64) -> Self {
        Event {
            agent: agent.into(),
            action: Action::Utter,
            action_label: None,
            text: text.into(),
            timestamp,
        }
    }

    pub fn instruct(
        agent: impl Into<String>,
        label: impl Into<String>,
        text: impl Into<String>,
        timestamp: i64,
    ) -> Self {
        Event {
            agent: agent.into(),
            action: Action::Instruct,
            action_label: Some(label.into()),
            text: text.into(),
            timestamp,
        }
    }
}

/// Serialization formats understood by [`Dialog::serialize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Canonical JSON document; lossless.
    Structured,
    /// One `Speaker: text` line per turn; keeps turns only.
    Plain,
}

impl Format {
    /// Picks a format from a file extension (`.json` or `.txt`).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Ok(Format::Structured),
            Some(ext) if ext.eq_ignore_ascii_case("txt") => Ok(Format::Plain),
            _ => Err(Error::UnknownExtension(path.to_path_buf())),
        }
    }
}

/// A complete conversation with its audit trail and metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Dialog {
    pub format_version: String,
    pub id: Option<u64>,
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub scenario: Option<Map<String, Value>>,
    pub personas: Option<BTreeMap<String, Persona>>,
    pub turns: Vec<Turn>,
    pub events: Vec<Event>,
}

impl Default for Dialog {
    fn default() -> Self {
        Dialog {
            format_version: FORMAT_VERSION.to_string(),
            id: None,
            model: None,
            seed: None,
            scenario: None,
            personas: None,
            turns: Vec::new(),
            events: Vec::new(),
        }
    }
}

impl Dialog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of turns.
    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Appends a turn together with its `utter` event.
    ///
    /// Timestamps earlier than the last recorded event are raised to it so
    /// the event list never goes backwards.
    pub fn append_utterance(
        &mut self,
        speaker: impl Into<String>,
        text: impl Into<String>,
        timestamp: i64,
    ) -> Result<()> {
        let turn = Turn::new(speaker, text)?;
        let timestamp = self.clamp_timestamp(timestamp);
        self.events.push(Event::utter(
            turn.speaker.clone(),
            turn.text.clone(),
            timestamp,
        ));
        self.turns.push(turn);
        Ok(())
    }

    /// Appends a non-utterance event (instructions, suggestions).
    pub fn push_event(&mut self, mut event: Event) -> Result<()> {
        if event.action == Action::Utter {
            return Err(Error::InvalidDialog(
                "utter events must go through append_utterance".into(),
            ));
        }
        if event.action == Action::Instruct && event.action_label.is_none() {
            return Err(Error::InvalidDialog(
                "instruct event without a label".into(),
            ));
        }
        event.timestamp = self.clamp_timestamp(event.timestamp);
        self.events.push(event);
        Ok(())
    }

    fn clamp_timestamp(&self, timestamp: i64) -> i64 {
        self.events
            .last()
            .map_or(timestamp, |last| timestamp.max(last.timestamp))
    }

    /// Events produced by orchestrators, in order.
    pub fn instructions(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.action == Action::Instruct)
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported formatVersion {:?}",
                self.format_version
            )));
        }
        if let Some(turn) = self.turns.iter().find(|t| t.speaker.trim().is_empty()) {
            return Err(Error::InvalidDialog(format!(
                "turn with empty speaker: {turn:?}"
            )));
        }
        let utters: Vec<&Event> = self
            .events
            .iter()
            .filter(|e| e.action == Action::Utter)
            .collect();
        if utters.len() != self.turns.len() {
            return Err(Error::InvalidDialog(format!(
                "{} turns but {} utter events",
                self.turns.len(),
                utters.len()
            )));
        }
        for (i, (turn, event)) in self.turns.iter().zip(&utters).enumerate() {
            if turn.speaker != event.agent || turn.text != event.text {
                return Err(Error::InvalidDialog(format!(
                    "turn {i} does not match its utter event"
                )));
            }
        }
        for pair in self.events.windows(2) {
            if pair[1].timestamp < pair[0].timestamp {
                return Err(Error::InvalidDialog("event timestamps go backwards".into()));
            }
        }
        if self
            .events
            .iter()
            .any(|e| e.action == Action::Instruct && e.action_label.is_none())
        {
            return Err(Error::InvalidDialog(
                "instruct event without a label".into(),
            ));
        }
        Ok(())
    }

    pub fn serialize(&self, format: Format) -> Result<String> {
        match format {
            Format::Structured => {
                let mut out =
                    serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
                out.push('\n');
                Ok(out)
            }
            Format::Plain => plain::write(&self.turns),
        }
    }

    pub fn deserialize(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Structured => {
                let dialog: Dialog =
                    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
                dialog.validate()?;
                Ok(dialog)
            }
            Format::Plain => {
                let mut dialog = Dialog::new();
                for turn in plain::read(text)? {
                    dialog.append_utterance(turn.speaker, turn.text, 0)?;
                }
                Ok(dialog)
            }
        }
    }

    /// Writes the dialog, choosing the format from the extension.
    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let body = self.serialize(Format::from_path(path)?)?;
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let format = Format::from_path(path)?;
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Dialog::deserialize(&text, format)
    }
}

/// Prints the plain format. Speakers that cannot be represented fall back
/// to the structured form's debug view.
impl fmt::Display for Dialog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.serialize(Format::Plain) {
            Ok(text) => f.write_str(&text),
            Err(_) => {
                for turn in &self.turns {
                    writeln!(f, "{turn}")?;
                }
                Ok(())
            }
        }
    }
}
