//! Persona-driven synthetic dialog generation: agents, orchestration,
//! scenarios and flow-graph analysis.

pub mod agent;
pub mod backend;
pub mod dialog;
pub mod error;
pub mod flow;
pub mod generator;
pub mod orchestrator;
pub mod persona;
pub mod scenario;

pub use agent::{dialog_with, Agent, Clock, DialogOptions};
pub use backend::{Backend, HttpBackend, Message, Role, SamplingParams, ScriptedBackend};
pub use dialog::{render_dialog, Action, Dialog, Event, Format, RenderOptions, Turn};
pub use error::{Error, Result, WireError};
pub use flow::{build_flow_graph, flow_to_dot, FlowGraph};
pub use generator::{generate_dialog, generate_dialogs, persona_dialog, GenerationBrief};
pub use orchestrator::{Instruction, Orchestrator};
pub use persona::{Persona, END_MARKER};
pub use scenario::{agents_for_scenario, describe_scenario, DatasetRoot, Scenario};
