//! Synthetic corpora for the benchmarks.

use dialogforge::Dialog;

const USER: [&str; 4] = [
    "I want to open an account",
    "can I check my balance",
    "please close my card",
    "thanks, that is all",
];
const SYSTEM: [&str; 4] = [
    "sure, what kind of account",
    "your balance is shown in the app",
    "the card has been closed",
    "happy to help, goodbye",
];

/// `n` dialogs of `turns` turns each, cycling through fixed phrases with a
/// per-dialog offset so transitions vary.
pub fn corpus(n: usize, turns: usize) -> Vec<Dialog> {
    (0..n)
        .map(|i| {
            let mut d = Dialog::new();
            for t in 0..turns {
                let (speaker, pool) = if t % 2 == 0 {
                    ("User", &USER)
                } else {
                    ("System", &SYSTEM)
                };
                let text = format!("{} {}", pool[(i + t / 2 * (i % 3 + 1)) % pool.len()], t % 5);
                d.append_utterance(speaker, text, t as i64)
                    .expect("valid turn");
            }
            d
        })
        .collect()
}
