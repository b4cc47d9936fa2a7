//! Command implementations behind the `dialogforge` binary.

pub mod spec;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

use dialogforge::agent::{dialog_with, DialogOptions, DEFAULT_MAX_TURNS};
use dialogforge::flow::{build_flow_graph, flow_to_dot};
use dialogforge::scenario::{agents_for_scenario, DatasetRoot};
use dialogforge::{render_dialog, Dialog, RenderOptions};
use thiserror::Error;
use tracing::{info, warn};

pub use spec::{Overrides, RunSpec};

/// Exit status for configuration and input problems.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status for backend and wire failures.
pub const EXIT_BACKEND: i32 = 2;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dialogforge::Error),
    #[error("dialog {index}: {source}")]
    AtIndex {
        index: u64,
        #[source]
        source: Box<Failure>,
    },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_backend() => EXIT_BACKEND,
            Failure::AtIndex { source, .. } => source.exit_code(),
            _ => EXIT_CONFIG,
        }
    }
}

fn options(spec: &RunSpec, id: u64, seed: u64) -> DialogOptions {
    DialogOptions {
        id: Some(id),
        seed: Some(seed),
        max_turns: spec.max_turns.unwrap_or(DEFAULT_MAX_TURNS),
        clock: spec.clock(),
    }
}

fn write_dialog(dialog: &Dialog, path: &Path) -> Result<(), Failure> {
    dialog.to_file(path)?;
    info!(path = %path.display(), turns = dialog.len(), "wrote dialog");
    Ok(())
}

fn run_one(spec: &RunSpec, id: u64, seed: u64) -> Result<Dialog, Failure> {
    let (mut a, mut b) = spec.agents()?;
    Ok(dialog_with(&mut a, &mut b, &options(spec, id, seed))?)
}

/// Runs one dialog and writes it to `out`, or `{output}/dialog.json`.
/// Returns the written path and the dialog.
pub fn cmd_generate(spec: &RunSpec, out: Option<&Path>) -> Result<(PathBuf, Dialog), Failure> {
    let id = spec.id.unwrap_or(0);
    let dialog = run_one(spec, id, spec.seed)?;
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| spec.output_dir().join("dialog.json"));
    write_dialog(&dialog, &path)?;
    Ok((path, dialog))
}

pub fn batch_file_name(i: u64) -> String {
    format!("dialog_{i:03}.json")
}

/// Runs `n` dialogs with ids `0..n` and seeds `seed + i`, each with fresh
/// agents and backend, spread over `workers` threads.
///
/// Files already written are kept when a later dialog fails; the error
/// names the first failing index.
pub fn cmd_batch(spec: &RunSpec, n: u64, workers: usize) -> Result<Vec<PathBuf>, Failure> {
    if n == 0 {
        return Err(Failure::Config("--n must be positive".into()));
    }
    let dir = spec.output_dir();
    let workers = workers.clamp(1, n as usize);
    let job = |i: u64| -> Result<PathBuf, Failure> {
        let seed = spec.seed.wrapping_add(i);
        let dialog = run_one(spec, i, seed).map_err(|e| Failure::AtIndex {
            index: i,
            source: Box::new(e),
        })?;
        let path = dir.join(batch_file_name(i));
        write_dialog(&dialog, &path)?;
        Ok(path)
    };

    let results: Vec<(u64, Result<PathBuf, Failure>)> = if workers == 1 {
        let mut out = Vec::new();
        for i in 0..n {
            let r = job(i);
            let failed = r.is_err();
            out.push((i, r));
            if failed {
                break;
            }
        }
        out
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let job = &job;
                    s.spawn(move || {
                        (w..n)
                            .step_by(workers)
                            .map(|i| (i, job(i)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            let mut all: Vec<_> = handles
                .into_iter()
                .flat_map(|h| h.join().expect("batch worker panicked"))
                .collect();
            all.sort_by_key(|(i, _)| *i);
            all
        })
    };

    let mut paths = Vec::new();
    for (_, r) in results {
        paths.push(r?);
    }
    Ok(paths)
}

pub fn star_file_name(id: u64) -> String {
    format!("star_dialog_{id}.json")
}

/// Outcome of a scenario run: files written and ids that failed.
#[derive(Debug, Default)]
pub struct StarReport {
    pub written: Vec<PathBuf>,
    pub failed: Vec<(u64, Failure)>,
}

impl StarReport {
    pub fn exit_code(&self) -> i32 {
        self.failed
            .iter()
            .map(|(_, e)| e.exit_code())
            .max()
            .unwrap_or(0)
    }
}

/// Simulates one dialog per scenario id. Failing ids are collected and the
/// remaining ids still run.
pub fn cmd_star_run(root: &Path, ids: &[u64], spec: &RunSpec) -> Result<StarReport, Failure> {
    let root = DatasetRoot::new(root)?;
    let dir = spec.output_dir();
    let mut report = StarReport::default();
    for &id in ids {
        let result = (|| -> Result<PathBuf, Failure> {
            let scenario = root.load_scenario(id)?;
            let charts = root.flowcharts_for(&scenario)?;
            let (wizard, user) = if charts.is_empty() {
                agents_for_scenario(&scenario, spec.backend()?)?
            } else {
                root.agents_for_scenario(&scenario, spec.backend()?)?
            };
            let (mut wizard, mut user) = spec.attach_all(wizard, user)?;
            let mut dialog = dialog_with(
                &mut wizard,
                &mut user,
                &options(spec, id, spec.seed.wrapping_add(id)),
            )?;
            dialog.scenario = Some(scenario.to_map());
            let path = dir.join(star_file_name(id));
            write_dialog(&dialog, &path)?;
            Ok(path)
        })();
        match result {
            Ok(path) => report.written.push(path),
            Err(e) => {
                warn!(id, error = %e, "scenario run failed");
                report.failed.push((id, e));
            }
        }
    }
    Ok(report)
}

pub fn cmd_print(file: &Path, opts: RenderOptions) -> Result<String, Failure> {
    let dialog = Dialog::from_file(file)?;
    Ok(render_dialog(&dialog, opts))
}

/// Expands a glob into sorted file paths. Unreadable entries are skipped.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>, Failure> {
    let paths = glob::glob(pattern)
        .map_err(|e| Failure::Config(format!("bad pattern {pattern:?}: {e}")))?;
    let mut out: Vec<PathBuf> = paths
        .filter_map(|p| match p {
            Ok(p) if p.is_file() => Some(p),
            Ok(_) => None,
            Err(e) => {
                warn!(error = %e, "skipping unreadable path");
                None
            }
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Paths of dialogs with at least `min_turns` turns and, when `contains`
/// is given, a turn containing it (case-insensitive).
pub fn cmd_filter(
    pattern: &str,
    min_turns: usize,
    contains: Option<&str>,
) -> Result<Vec<PathBuf>, Failure> {
    let needle = contains.map(str::to_lowercase);
    let mut matched = Vec::new();
    for path in expand_glob(pattern)? {
        let dialog = match Dialog::from_file(&path) {
            Ok(d) => d,
            Err(e) => {
                warn!(path = %path.display(), error = %e, "skipping unreadable dialog");
                continue;
            }
        };
        if dialog.len() < min_turns {
            continue;
        }
        if let Some(needle) = &needle {
            if !dialog
                .turns
                .iter()
                .any(|t| t.text.to_lowercase().contains(needle))
            {
                continue;
            }
        }
        matched.push(path);
    }
    Ok(matched)
}

/// Builds the flow graph over every dialog matching `pattern` and writes
/// its DOT rendering to `out`.
pub fn cmd_flow(pattern: &str, k: usize, seed: u64, out: &Path) -> Result<String, Failure> {
    let mut dialogs = Vec::new();
    for path in expand_glob(pattern)? {
        match Dialog::from_file(&path) {
            Ok(d) => dialogs.push(d),
            Err(e) => warn!(path = %path.display(), error = %e, "skipping unreadable dialog"),
        }
    }
    if dialogs.is_empty() {
        return Err(Failure::Config(format!("no dialogs match {pattern:?}")));
    }
    let dot = flow_to_dot(&build_flow_graph(&dialogs, k, seed)?);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::Config(format!("{}: {e}", parent.display())))?;
    }
    let mut file = std::fs::File::create(out)
        .map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    file.write_all(dot.as_bytes())
        .map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    Ok(dot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Config("x".into()).exit_code(), EXIT_CONFIG);
        assert_eq!(
            Failure::from(dialogforge::Error::BackendExhausted).exit_code(),
            EXIT_BACKEND
        );
        let nested = Failure::AtIndex {
            index: 3,
            source: Box::new(dialogforge::Error::EmptyCompletion.into()),
        };
        assert_eq!(nested.exit_code(), EXIT_BACKEND);
        assert!(nested.to_string().starts_with("dialog 3:"));
    }

    #[test]
    fn file_names() {
        assert_eq!(batch_file_name(4), "dialog_004.json");
        assert_eq!(star_file_name(101), "star_dialog_101.json");
    }
}
