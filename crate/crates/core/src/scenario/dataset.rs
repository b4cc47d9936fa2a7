use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::Value;

use super::{agents_with_flowcharts, Flowchart, Scenario};
use crate::agent::Agent;
use crate::backend::Backend;
use crate::dialog::Dialog;
use crate::error::{Error, Result};

/// A dataset directory laid out as
///
/// ```text
/// dialogues/{id}.json
/// scenarios/{id}.json
/// flowcharts/{domain}/{task}.json
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRoot {
    path: PathBuf,
}

impl DatasetRoot {
    /// Relative paths resolve against the current working directory.
    pub fn new(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let path = if path.is_absolute() {
            path.to_path_buf()
        } else {
            std::env::current_dir()
                .map_err(|e| Error::io(path, e))?
                .join(path)
        };
        if !path.is_dir() {
            return Err(Error::NotADirectory(path));
        }
        Ok(DatasetRoot { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn dialog_path(&self, id: u64) -> PathBuf {
        self.path.join("dialogues").join(format!("{id}.json"))
    }

    fn scenario_path(&self, id: u64) -> PathBuf {
        self.path.join("scenarios").join(format!("{id}.json"))
    }

    /// Loads a stored dialog and attaches its scenario when one exists.
    pub fn load_dialog(&self, id: u64) -> Result<Dialog> {
        let path = self.dialog_path(id);
        if !path.is_file() {
            return Err(Error::NotFound(id));
        }
        let mut dialog = Dialog::from_file(&path)?;
        if let Some(Value::Object(map)) = self.read_json(&self.scenario_path(id))? {
            dialog.scenario = Some(map);
        }
        dialog.id.get_or_insert(id);
        Ok(dialog)
    }

    pub fn load_scenario(&self, id: u64) -> Result<Scenario> {
        match self.read_json(&self.scenario_path(id))? {
            Some(value) => Scenario::from_value(value),
            None => Err(Error::NotFound(id)),
        }
    }

    pub fn load_flowchart(&self, domain: &str, task: &str) -> Result<Option<Flowchart>> {
        let path = self
            .path
            .join("flowcharts")
            .join(domain)
            .join(format!("{task}.json"));
        match fs::read_to_string(&path) {
            Ok(text) => Flowchart::from_json(&text).map(Some),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Flowcharts for every capability of `s` that has one on disk.
    pub fn flowcharts_for(&self, s: &Scenario) -> Result<Vec<Flowchart>> {
        let mut charts = Vec::new();
        for cap in &s.capabilities {
            if let Some(chart) = self.load_flowchart(&cap.domain, &cap.task)? {
                charts.push(chart);
            }
        }
        Ok(charts)
    }

    /// Like [`super::agents_for_scenario`], with flowchart step summaries
    /// folded into the wizard's rules.
    pub fn agents_for_scenario(
        &self,
        s: &Scenario,
        backend: Arc<dyn Backend>,
    ) -> Result<(Agent, Agent)> {
        let charts = self.flowcharts_for(s)?;
        agents_with_flowcharts(s, backend, &charts)
    }

    fn read_json(&self, path: &Path) -> Result<Option<Value>> {
        match fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_directory() {
        assert!(matches!(
            DatasetRoot::new("/definitely/not/here"),
            Err(Error::NotADirectory(_))
        ));
    }

    #[test]
    fn relative_paths_are_absolutized() {
        let root = DatasetRoot::new(".").unwrap();
        assert!(root.path().is_absolute());
    }

    #[test]
    fn absent_entries() {
        let dir = tempfile::tempdir().unwrap();
        let root = DatasetRoot::new(dir.path()).unwrap();
        assert!(matches!(root.load_dialog(999), Err(Error::NotFound(999))));
        assert!(matches!(root.load_scenario(999), Err(Error::NotFound(999))));
        assert_eq!(root.load_flowchart("banking", "x").unwrap(), None);
    }
}
