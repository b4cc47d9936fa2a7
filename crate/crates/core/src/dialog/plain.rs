//! `Speaker: text` line format.
//!
//! The separator is the first `": "` on a line, so speakers may not contain
//! it. Line breaks and backslashes inside the text are escaped (`\n`, `\r`,
//! `\\`) to keep one turn per line.

use super::Turn;
use crate::error::{Error, Result};

const SEPARATOR: &str = ": ";

pub(super) fn write(turns: &[Turn]) -> Result<String> {
    let mut out = String::new();
    for turn in turns {
        if turn.speaker.contains(SEPARATOR) || turn.speaker.contains(['\n', '\r']) {
            return Err(Error::UnserializableSpeaker(turn.speaker.clone()));
        }
        out.push_str(&turn.speaker);
        out.push_str(SEPARATOR);
        escape_into(&turn.text, &mut out);
        out.push('\n');
    }
    Ok(out)
}

pub(super) fn read(text: &str) -> Result<Vec<Turn>> {
    let mut turns = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = || Error::BadTurnLine {
            line: idx + 1,
            text: line.to_string(),
        };
        // Editors tend to eat the space after a trailing colon.
        let (speaker, body) = match line.split_once(SEPARATOR) {
            Some(parts) => parts,
            None => match line.strip_suffix(':') {
                Some(speaker) => (speaker, ""),
                None => return Err(bad()),
            },
        };
        if speaker.trim().is_empty() {
            return Err(bad());
        }
        turns.push(Turn {
            speaker: speaker.to_string(),
            text: unescape(body),
        });
    }
    Ok(turns)
}

fn escape_into(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            // Not an escape we produce; keep it verbatim.
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}
