use std::collections::HashMap;
use std::fmt::Write;

use serde_json::Value;

use super::{Action, Dialog};

const RESET: &str = "\x1b[0m";
const DIM: &str = "\x1b[2m";
const BOLD: &str = "\x1b[1m";
const SPEAKER_COLORS: [&str; 6] = [
    "\x1b[1;34m",
    "\x1b[1;32m",
    "\x1b[1;35m",
    "\x1b[1;36m",
    "\x1b[1;33m",
    "\x1b[1;31m",
];
const EVENT_COLOR: &str = "\x1b[33m";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub show_scenario: bool,
    pub show_orchestration: bool,
    /// ANSI styling; callers should turn this off when stdout is not a terminal.
    pub color: bool,
}

struct Style {
    color: bool,
}

impl Style {
    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("{code}{text}{RESET}")
        } else {
            text.to_string()
        }
    }
}

/// Human-oriented rendering of a dialog.
///
/// With both flags off and no color this is the plain `Speaker: text` view.
pub fn render_dialog(dialog: &Dialog, opts: RenderOptions) -> String {
    let style = Style { color: opts.color };
    let mut out = String::new();

    if opts.show_scenario {
        out.push_str(&style.paint(BOLD, "--- scenario ---"));
        out.push('\n');
        match &dialog.scenario {
            Some(scenario) if !scenario.is_empty() => {
                for (key, value) in scenario {
                    let value = match value {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = writeln!(out, "{}: {value}", style.paint(DIM, key));
                }
            }
            _ => out.push_str("(none)\n"),
        }
        out.push_str(&style.paint(BOLD, "----------------"));
        out.push('\n');
    }

    let mut palette: HashMap<String, &'static str> = HashMap::new();
    let mut color_for = |speaker: &str| -> &'static str {
        let next = SPEAKER_COLORS[palette.len() % SPEAKER_COLORS.len()];
        palette.entry(speaker.to_string()).or_insert(next)
    };

    let mut turns = dialog.turns.iter();
    for event in &dialog.events {
        match event.action {
            Action::Utter => {
                if let Some(turn) = turns.next() {
                    let code = color_for(&turn.speaker);
                    let _ = writeln!(out, "{}: {}", style.paint(code, &turn.speaker), turn.text);
                }
            }
            Action::Instruct | Action::PickSuggestion if opts.show_orchestration => {
                let label = event.action_label.as_deref().unwrap_or("-");
                let header = format!("[{} {} -> {}]", event.action, label, event.agent);
                let _ = writeln!(
                    out,
                    "  {} {}",
                    style.paint(EVENT_COLOR, &header),
                    style.paint(DIM, &event.text)
                );
            }
            _ => {}
        }
    }
    // Turns without events only happen in hand-built dialogs.
    for turn in turns {
        let code = color_for(&turn.speaker);
        let _ = writeln!(out, "{}: {}", style.paint(code, &turn.speaker), turn.text);
    }
    out
}
