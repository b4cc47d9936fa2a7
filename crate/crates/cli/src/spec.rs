//! The declarative run file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dialogforge::agent::{Agent, Clock};
use dialogforge::backend::{Backend, HttpBackend, ScriptedBackend, BASE_URL_ENV};
use dialogforge::orchestrator::{
    ChangeMind, InstructionList, Length, Orchestrator, SimpleReflex, SimpleResponse,
};
use dialogforge::Persona;
use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunSpec {
    pub backend: BackendSpec,
    /// Persona profiles keyed by agent name, in speaking order.
    #[serde(default)]
    pub personas: IndexMap<String, Value>,
    #[serde(default)]
    pub orchestrators: Vec<OrchestratorSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub id: Option<u64>,
    #[serde(default)]
    pub max_turns: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub clock: Option<ClockSpec>,
    /// Fixed opening line for the first persona.
    #[serde(default)]
    pub first_utterance: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BackendSpec {
    Scripted(ScriptedSpec),
    Http(HttpSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedSpec {
    pub scripted: Vec<String>,
    #[serde(default)]
    pub cycle: bool,
    #[serde(default)]
    pub model: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HttpSpec {
    #[serde(default)]
    pub base_url: Option<String>,
    pub model: String,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default)]
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockSpec {
    System,
    Logical,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrchestratorSpec {
    #[serde(rename = "type")]
    pub kind: String,
    /// Agent the orchestrator is attached to; defaults to the first persona.
    #[serde(default)]
    pub agent: Option<String>,
    #[serde(default)]
    pub params: Value,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub seed: Option<u64>,
    pub max_turns: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunSpec {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Config(msg) => Failure::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let spec: RunSpec = serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Failure::Config(format!(
                "{e} (backend must be either {{\"scripted\": [...]}} or {{\"baseUrl\", \"model\"}})"
            )),
            _ => Failure::Config(e.to_string()),
        })?;
        Ok(spec)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(n) = o.max_turns {
            self.max_turns = Some(n);
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        if let BackendSpec::Http(http) = &mut self.backend {
            if let Some(url) = &o.base_url {
                http.base_url = Some(url.clone());
            }
            if let Some(model) = &o.model {
                http.model = model.clone();
            }
            if let Some(key) = &o.api_key {
                http.api_key = Some(key.clone());
            }
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn clock(&self) -> Clock {
        let logical = match self.clock {
            Some(ClockSpec::Logical) => true,
            Some(ClockSpec::System) => false,
            None => matches!(self.backend, BackendSpec::Scripted(_)),
        };
        if logical {
            Clock::Logical(0)
        } else {
            Clock::System
        }
    }

    /// A fresh backend; scripted backends restart from the top of the script.
    pub fn backend(&self) -> Result<Arc<dyn Backend>, Failure> {
        match &self.backend {
            BackendSpec::Scripted(s) => {
                if s.scripted.is_empty() && s.cycle {
                    return Err(Failure::Config(
                        "a cycling script needs at least one entry".into(),
                    ));
                }
                let mut b = ScriptedBackend::new(s.scripted.clone(), s.cycle);
                if let Some(model) = &s.model {
                    b = b.with_model(model.clone());
                }
                Ok(Arc::new(b))
            }
            BackendSpec::Http(h) => {
                let url = h
                    .base_url
                    .clone()
                    .or_else(|| std::env::var(BASE_URL_ENV).ok())
                    .ok_or_else(|| {
                        Failure::Config(format!("no baseUrl in spec and {BASE_URL_ENV} is not set"))
                    })?;
                let mut b = HttpBackend::new(&url, h.model.clone(), h.api_key.clone())?;
                if let Some(secs) = h.timeout_secs {
                    b = b.with_timeout(std::time::Duration::from_secs(secs));
                }
                Ok(Arc::new(b))
            }
        }
    }

    pub fn personas(&self) -> Result<Vec<Persona>, Failure> {
        self.personas
            .iter()
            .map(|(name, value)| {
                let mut value = value.clone();
                let obj = value.as_object_mut().ok_or_else(|| {
                    Failure::Config(format!("persona {name:?} must be an object"))
                })?;
                obj.entry("name")
                    .or_insert_with(|| Value::String(name.clone()));
                let persona: Persona = serde_json::from_value(value)
                    .map_err(|e| Failure::Config(format!("persona {name:?}: {e}")))?;
                persona.validate()?;
                Ok(persona)
            })
            .collect()
    }

    /// The two agents described by `personas`, with orchestrators attached.
    pub fn agents(&self) -> Result<(Agent, Agent), Failure> {
        let personas = self.personas()?;
        let [first, second] = <[Persona; 2]>::try_from(personas).map_err(|p| {
            Failure::Config(format!(
                "exactly two personas are required, found {}",
                p.len()
            ))
        })?;
        let names: Vec<&String> = self.personas.keys().collect();
        let backend = self.backend()?;
        let mut a = Agent::new(backend.clone(), first)?.named(names[0].as_str());
        if let Some(greeting) = &self.first_utterance {
            a = a.first_utterance(greeting.clone());
        }
        let b = Agent::new(backend, second)?.named(names[1].as_str());
        self.attach_all(a, b)
    }

    /// Attaches the configured orchestrators to `a` and `b`. Orchestrators
    /// without an explicit agent go to `a`.
    pub fn attach_all(&self, mut a: Agent, mut b: Agent) -> Result<(Agent, Agent), Failure> {
        for spec in &self.orchestrators {
            let target = spec.agent.as_deref().unwrap_or(a.name());
            let orchestrator = spec.build()?;
            if target == a.name() {
                a.attach(orchestrator);
            } else if target == b.name() {
                b.attach(orchestrator);
            } else {
                return Err(Failure::Config(format!(
                    "orchestrator {:?} targets unknown agent {target:?}",
                    spec.kind
                )));
            }
        }
        Ok((a, b))
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct LengthParams {
    min: usize,
    max: usize,
    #[serde(default)]
    persistent: bool,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ChangeMindParams {
    probability: f64,
    #[serde(default)]
    reasons: Vec<String>,
    max_times: usize,
    #[serde(default)]
    persistent: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Plan {
    Steps(Vec<String>),
    Indexed(BTreeMap<String, String>),
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct InstructionListParams {
    plan: Plan,
    #[serde(default)]
    persistent: bool,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ReflexParams {
    keyword: String,
    instruction: String,
    #[serde(default)]
    persistent: bool,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SimpleResponseParams {
    candidates: Vec<String>,
    top_k: usize,
}

fn params<T: for<'de> Deserialize<'de>>(kind: &str, value: &Value) -> Result<T, Failure> {
    let value = if value.is_null() {
        Value::Object(Default::default())
    } else {
        value.clone()
    };
    serde_json::from_value(value).map_err(|e| Failure::Config(format!("{kind} params: {e}")))
}

impl OrchestratorSpec {
    /// Type names match case-insensitively, with or without an
    /// `Orchestrator` suffix: `length`, `LengthOrchestrator` and
    /// `change_mind` all work.
    pub fn build(&self) -> Result<Box<dyn Orchestrator>, Failure> {
        let key: String = self
            .kind
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let key = key.strip_suffix("orchestrator").unwrap_or(&key);
        let kind = self.kind.as_str();
        Ok(match key {
            "length" => {
                let p: LengthParams = params(kind, &self.params)?;
                Box::new(Length::new(p.min, p.max)?.persistent(p.persistent))
            }
            "changemind" => {
                let p: ChangeMindParams = params(kind, &self.params)?;
                Box::new(
                    ChangeMind::new(p.probability, p.reasons, p.max_times)?
                        .persistent(p.persistent),
                )
            }
            "instructionlist" => {
                let p: InstructionListParams = params(kind, &self.params)?;
                let list = match p.plan {
                    Plan::Steps(steps) => InstructionList::sequence(steps),
                    Plan::Indexed(map) => {
                        let mut plan = Vec::new();
                        for (turn, text) in map {
                            let turn: usize = turn.parse().map_err(|_| {
                                Failure::Config(format!(
                                    "{kind} plan key {turn:?} is not a turn index"
                                ))
                            })?;
                            plan.push((turn, text));
                        }
                        InstructionList::new(plan)
                    }
                };
                Box::new(list.persistent(p.persistent))
            }
            "simplereflex" | "reflex" => {
                let p: ReflexParams = params(kind, &self.params)?;
                Box::new(SimpleReflex::contains(p.keyword, p.instruction).persistent(p.persistent))
            }
            "simpleresponse" => {
                let p: SimpleResponseParams = params(kind, &self.params)?;
                Box::new(SimpleResponse::new(p.candidates, p.top_k)?)
            }
            _ => {
                return Err(Failure::Config(format!(
                    "unknown orchestrator type {kind:?}"
                )))
            }
        })
    }
}
