//! Task-oriented scenarios: schema, natural-language description and
//! construction of the wizard/user agent pair.

mod dataset;
mod flowchart;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::agent::Agent;
use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::persona::Persona;

pub use dataset::DatasetRoot;
pub use flowchart::{Flowchart, FlowchartEdge, FlowchartNode};

pub const WIZARD_NAME: &str = "Wizard";
pub const USER_NAME: &str = "User";

const COOPERATIVE: &str =
    "Cooperative and clear about what you need; you answer questions directly.";
pub const UNCOOPERATIVE: &str = "Not fully cooperative: you hesitate, give incomplete \
answers and may change details or introduce complications along the way.";
const MULTI_TASK: &str = "You have more than one task to get done in this conversation.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capability {
    #[serde(rename = "Task", alias = "task")]
    pub task: String,
    #[serde(rename = "Domain", alias = "domain")]
    pub domain: String,
}

/// Metadata for a task-oriented dialog. Reads both the capitalized keys
/// (`Domains`, `UserTask`, …) and their camel-case forms; writes the
/// capitalized ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "Domains", alias = "domains")]
    pub domains: Vec<String>,
    #[serde(rename = "UserTask", alias = "userTask")]
    pub user_task: String,
    #[serde(rename = "WizardTask", alias = "wizardTask")]
    pub wizard_task: String,
    #[serde(rename = "Happy", alias = "happy")]
    pub happy: bool,
    #[serde(rename = "MultiTask", alias = "multiTask")]
    pub multi_task: bool,
    #[serde(
        rename = "WizardCapabilities",
        alias = "capabilities",
        alias = "wizardCapabilities",
        default
    )]
    pub capabilities: Vec<Capability>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.domains.is_empty() {
            return Err(Error::InvalidScenario("no domains".into()));
        }
        if let Some(cap) = self
            .capabilities
            .iter()
            .find(|c| !self.domains.contains(&c.domain))
        {
            return Err(Error::InvalidScenario(format!(
                "capability {:?} uses domain {:?} which is not listed in Domains",
                cap.task, cap.domain
            )));
        }
        Ok(())
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_value(value).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Capitalized-key map suitable for `Dialog::scenario`.
    pub fn to_map(&self) -> Map<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(map)) => map,
            _ => Map::new(),
        }
    }
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Plain-English summary, one sentence per field group.
pub fn describe_scenario(s: &Scenario) -> String {
    let noun = if s.domains.len() == 1 {
        "domain"
    } else {
        "domains"
    };
    let mut sentences = vec![
        format!(
            "The conversation takes place in the {} {noun}.",
            join_list(&s.domains)
        ),
        format!("The user's task: {}.", s.user_task.trim_end_matches('.')),
        format!(
            "The wizard's task: {}.",
            s.wizard_task.trim_end_matches('.')
        ),
    ];
    sentences.push(if s.happy {
        "The user is cooperative (happy path).".to_string()
    } else {
        "The user is not fully cooperative and may introduce complications (unhappy path)."
            .to_string()
    });
    sentences.push(if s.multi_task {
        "The user has several tasks to complete (multi-task).".to_string()
    } else {
        "The user has a single task to complete (single task).".to_string()
    });
    if !s.capabilities.is_empty() {
        let caps: Vec<String> = s
            .capabilities
            .iter()
            .map(|c| format!("can {} in {}", c.task, c.domain))
            .collect();
        sentences.push(format!("The wizard {}.", join_list(&caps)));
    }
    sentences.join(" ")
}

/// Builds the wizard and user personas for `s`. `flowcharts` supplies step
/// summaries for capabilities whose task has a chart.
pub fn scenario_personas(s: &Scenario, flowcharts: &[Flowchart]) -> (Persona, Persona) {
    let mut rules = format!("Your task: {}", s.wizard_task);
    for cap in &s.capabilities {
        rules.push_str(&format!(
            "\nYou can {} in the {} domain.",
            cap.task, cap.domain
        ));
        if let Some(chart) = flowcharts.iter().find(|f| f.task == cap.task) {
            let steps = chart.describe().unwrap_or_else(|_| chart.edge_list());
            rules.push_str(&format!("\nSteps for {}:\n{steps}", cap.task));
        }
    }
    let wizard = Persona::new(WIZARD_NAME)
        .role("assistant/wizard")
        .background(format!(
            "You work as a virtual assistant for the {} {}.",
            join_list(&s.domains),
            if s.domains.len() == 1 {
                "domain"
            } else {
                "domains"
            }
        ))
        .rules(rules);

    let mut personality = if s.happy { COOPERATIVE } else { UNCOOPERATIVE }.to_string();
    if s.multi_task {
        personality.push(' ');
        personality.push_str(MULTI_TASK);
    }
    let user = Persona::new(USER_NAME)
        .role("user")
        .personality(personality)
        .circumstances(format!("You want to: {}", s.user_task));
    (wizard, user)
}

/// Wizard and user agents for `s`; the wizard opens the conversation.
pub fn agents_for_scenario(s: &Scenario, backend: Arc<dyn Backend>) -> Result<(Agent, Agent)> {
    agents_with_flowcharts(s, backend, &[])
}

pub(crate) fn agents_with_flowcharts(
    s: &Scenario,
    backend: Arc<dyn Backend>,
    flowcharts: &[Flowchart],
) -> Result<(Agent, Agent)> {
    s.validate()?;
    let (wizard, user) = scenario_personas(s, flowcharts);
    Ok((
        Agent::new(backend.clone(), wizard)?,
        Agent::new(backend, user)?,
    ))
}
