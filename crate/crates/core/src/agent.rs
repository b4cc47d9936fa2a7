//! Persona agents and the two-party turn-taking loop.

use std::collections::BTreeMap;
use std::ops::BitOr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracing::debug;

use crate::backend::{Backend, Message, SamplingParams};
use crate::dialog::{Dialog, Event};
use crate::error::{Error, Result};
use crate::orchestrator::{Orchestrator, TurnContext};
use crate::persona::{persona_prompt_with, Persona, PromptOptions};

pub const DEFAULT_MAX_TURNS: usize = 40;

/// An LLM-backed participant role-playing a [`Persona`].
pub struct Agent {
    name: String,
    persona: Persona,
    backend: Arc<dyn Backend>,
    params: SamplingParams,
    prompt: PromptOptions,
    memory: Vec<Message>,
    orchestrators: Vec<Box<dyn Orchestrator>>,
    first_utterance: Option<String>,
    rng: ChaCha8Rng,
    seed: u64,
    spoken: usize,
}

impl std::fmt::Debug for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Agent")
            .field("name", &self.name)
            .field("model", &self.backend.model_name())
            .field("orchestrators", &self.orchestrator_names())
            .field("memory", &self.memory.len())
            .field("seed", &self.seed)
            .finish()
    }
}

impl Agent {
    pub fn new(backend: Arc<dyn Backend>, persona: Persona) -> Result<Self> {
        persona.validate()?;
        let seed = entropy_seed();
        let mut agent = Agent {
            name: persona.name.clone(),
            persona,
            backend,
            params: SamplingParams::default(),
            prompt: PromptOptions::default(),
            memory: Vec::new(),
            orchestrators: Vec::new(),
            first_utterance: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            spoken: 0,
        };
        agent.reset(Some(seed));
        Ok(agent)
    }

    /// Overrides the display name (defaults to the persona's name).
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Fixed opening line used instead of a generated one.
    pub fn first_utterance(mut self, text: impl Into<String>) -> Self {
        self.first_utterance = Some(text.into());
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.reset(Some(seed));
        self
    }

    pub fn with_params(mut self, params: SamplingParams) -> Self {
        let seed = self.seed;
        self.params = params;
        self.reset(Some(seed));
        self
    }

    pub fn with_prompt_options(mut self, prompt: PromptOptions) -> Self {
        self.prompt = prompt;
        let seed = self.seed;
        self.reset(Some(seed));
        self
    }

    /// Appends an orchestrator; same as `agent | orchestrator`.
    pub fn attach(&mut self, orchestrator: impl Orchestrator + 'static) {
        self.orchestrators.push(Box::new(orchestrator));
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn persona(&self) -> &Persona {
        &self.persona
    }

    pub fn memory(&self) -> &[Message] {
        &self.memory
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &SamplingParams {
        &self.params
    }

    pub fn end_marker(&self) -> &str {
        &self.prompt.end_marker
    }

    pub fn model_name(&self) -> &str {
        self.backend.model_name()
    }

    pub fn system_prompt(&self) -> String {
        persona_prompt_with(&self.persona, &self.prompt)
    }

    pub fn orchestrator_names(&self) -> Vec<&str> {
        self.orchestrators.iter().map(|o| o.name()).collect()
    }

    /// Clears memory and orchestrator state and reseeds the rng (from
    /// entropy when `seed` is `None`). The seed is also forwarded to the
    /// backend through the sampling parameters.
    pub fn reset(&mut self, seed: Option<u64>) {
        let seed = seed.unwrap_or_else(entropy_seed);
        self.seed = seed;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.params.seed = Some(seed);
        self.memory = vec![Message::system(self.system_prompt())];
        self.spoken = 0;
        for o in &mut self.orchestrators {
            o.reset();
        }
    }

    /// Draws from the agent's rng. Exposed for orchestrator testing.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn respond(
        &mut self,
        incoming: Option<&str>,
        dialog: &Dialog,
    ) -> Result<(String, Vec<Event>)> {
        self.respond_at(incoming, dialog, unix_now())
    }

    /// Produces the next utterance.
    ///
    /// Orchestrators are consulted in attachment order; their instructions
    /// go into memory as system messages (non-persistent ones are removed
    /// again after the completion) and come back as `instruct` events
    /// stamped with `timestamp`. The caller records the utterance itself.
    pub fn respond_at(
        &mut self,
        incoming: Option<&str>,
        dialog: &Dialog,
        timestamp: i64,
    ) -> Result<(String, Vec<Event>)> {
        if self.spoken == 0 {
            if let Some(greeting) = self.first_utterance.clone() {
                if let Some(text) = incoming {
                    self.memory.push(Message::user(text));
                }
                self.memory.push(Message::assistant(&greeting));
                self.spoken += 1;
                return Ok((greeting, Vec::new()));
            }
        }

        let mut events = Vec::new();
        let mut transient = Vec::new();
        let mut ctx = TurnContext {
            dialog,
            last_utterance: incoming,
            agent: &self.name,
            rng: &mut self.rng,
        };
        for orchestrator in &mut self.orchestrators {
            if let Some(instruction) = orchestrator.instruct(&mut ctx) {
                if !instruction.persist {
                    transient.push(self.memory.len());
                }
                self.memory.push(Message::system(&instruction.text));
                events.push(Event::instruct(
                    self.name.clone(),
                    instruction.label,
                    instruction.text,
                    timestamp,
                ));
            }
        }
        if let Some(text) = incoming {
            self.memory.push(Message::user(text));
        }

        let result = self.backend.complete(&self.memory, &self.params);
        for idx in transient.into_iter().rev() {
            self.memory.remove(idx);
        }
        let reply = result?.trim().to_string();
        if reply.is_empty() {
            return Err(Error::EmptyCompletion);
        }
        self.memory.push(Message::assistant(&reply));
        self.spoken += 1;
        Ok((reply, events))
    }
}

impl<O: Orchestrator + 'static> BitOr<O> for Agent {
    type Output = Agent;

    fn bitor(mut self, orchestrator: O) -> Agent {
        self.attach(orchestrator);
        self
    }
}

/// Where event timestamps come from during [`dialog_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Wall-clock Unix seconds.
    #[default]
    System,
    /// Counter starting at the given value, advanced by one per event.
    /// Makes runs byte-reproducible.
    Logical(i64),
}

struct Ticker {
    clock: Clock,
    next: i64,
}

impl Ticker {
    fn new(clock: Clock) -> Self {
        let next = match clock {
            Clock::Logical(start) => start,
            Clock::System => 0,
        };
        Ticker { clock, next }
    }

    fn tick(&mut self) -> i64 {
        match self.clock {
            Clock::System => unix_now(),
            Clock::Logical(_) => {
                let t = self.next;
                self.next += 1;
                t
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogOptions {
    pub id: Option<u64>,
    /// Drawn from entropy (and recorded on the dialog) when absent.
    pub seed: Option<u64>,
    pub max_turns: usize,
    pub clock: Clock,
}

impl Default for DialogOptions {
    fn default() -> Self {
        DialogOptions {
            id: None,
            seed: None,
            max_turns: DEFAULT_MAX_TURNS,
            clock: Clock::System,
        }
    }
}

impl DialogOptions {
    pub fn seeded(id: u64, seed: u64) -> Self {
        DialogOptions {
            id: Some(id),
            seed: Some(seed),
            ..Default::default()
        }
    }
}

/// Runs a conversation in which `a` speaks first and the two alternate.
///
/// Both agents are reset and reseeded from `(seed, position)` first. The
/// conversation stops after an utterance ending in the speaker's end marker
/// (stripped; a bare marker adds no turn) or after `max_turns` turns.
pub fn dialog_with(a: &mut Agent, b: &mut Agent, opts: &DialogOptions) -> Result<Dialog> {
    if a.name == b.name {
        return Err(Error::DuplicateAgentName(a.name.clone()));
    }
    if opts.max_turns == 0 {
        return Err(Error::Config("max_turns must be positive".into()));
    }
    let seed = opts.seed.unwrap_or_else(entropy_seed);
    a.reset(Some(derive_seed(seed, 0)));
    b.reset(Some(derive_seed(seed, 1)));

    let mut dialog = Dialog::new();
    dialog.id = opts.id;
    dialog.seed = Some(seed);
    dialog.model = Some(if a.model_name() == b.model_name() {
        a.model_name().to_string()
    } else {
        format!("{} / {}", a.model_name(), b.model_name())
    });
    dialog.personas = Some(BTreeMap::from([
        (a.name.clone(), a.persona.clone()),
        (b.name.clone(), b.persona.clone()),
    ]));

    let mut ticker = Ticker::new(opts.clock);
    let mut incoming: Option<String> = None;
    for turn in 0..opts.max_turns {
        let speaker: &mut Agent = if turn % 2 == 0 { &mut *a } else { &mut *b };
        let (raw, events) = speaker.respond_at(incoming.as_deref(), &dialog, ticker.tick())?;
        for event in events {
            dialog.push_event(event)?;
        }
        let (text, ended) = split_end_marker(&raw, speaker.end_marker());
        if !(ended && text.is_empty()) {
            dialog.append_utterance(speaker.name.clone(), text.clone(), ticker.tick())?;
        }
        if ended {
            debug!(turns = dialog.len(), "end marker received");
            break;
        }
        incoming = Some(text);
    }
    Ok(dialog)
}

/// Strips a trailing end marker. Returns the remaining text and whether the
/// marker was present.
pub fn split_end_marker(text: &str, marker: &str) -> (String, bool) {
    let trimmed = text.trim();
    match trimmed.strip_suffix(marker) {
        Some(rest) if !marker.is_empty() => (rest.trim_end().to_string(), true),
        _ => (trimmed.to_string(), false),
    }
}

/// Per-agent seed derived from a dialog seed and the agent's position.
pub fn derive_seed(seed: u64, position: u64) -> u64 {
    splitmix64(seed ^ splitmix64(position.wrapping_add(1)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn entropy_seed() -> u64 {
    rand::rng().random()
}

fn unix_now() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Role, ScriptedBackend};
    use crate::dialog::{Action, Format};
    use crate::orchestrator::{ChangeMind, Instruction, InstructionList, Length};

    fn scripted(lines: &[&str]) -> Arc<dyn Backend> {
        Arc::new(ScriptedBackend::new(lines.iter().copied(), false))
    }

    fn cycling(lines: &[&str]) -> Arc<dyn Backend> {
        Arc::new(ScriptedBackend::new(lines.iter().copied(), true))
    }

    fn memory_roles(memory: &[Message]) -> Vec<Role> {
        memory.iter().map(|m| m.role).collect()
    }

    fn agent(name: &str, backend: Arc<dyn Backend>) -> Agent {
        Agent::new(backend, Persona::new(name)).unwrap()
    }

    #[test]
    fn name_defaults_to_persona() {
        let a = agent("Alice", scripted(&[]));
        assert_eq!(a.name(), "Alice");
        let a = Agent::new(scripted(&[]), Persona::new("Alice").role("barista"))
            .unwrap()
            .named("Barista");
        assert_eq!(a.name(), "Barista");
        assert_eq!(a.memory().len(), 1);
        assert_eq!(a.memory()[0].role, Role::System);
    }

    #[test]
    fn invalid_persona_rejected() {
        assert!(Agent::new(scripted(&[]), Persona::new("")).is_err());
    }

    #[test]
    fn same_seed_same_rng_stream() {
        let mut a = agent("A", scripted(&[])).seeded(0);
        let mut b = agent("B", scripted(&[])).seeded(0);
        let xa: Vec<u64> = (0..8).map(|_| a.rng().random()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.rng().random()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn respond_passthrough() {
        let mut a = agent("A", scripted(&["Sure!"]));
        let (reply, events) = a.respond(Some("Can you help?"), &Dialog::new()).unwrap();
        assert_eq!(reply, "Sure!");
        assert!(events.is_empty());
        assert_eq!(
            memory_roles(a.memory()),
            [Role::System, Role::User, Role::Assistant]
        );
    }

    struct AlwaysSayHello;

    impl Orchestrator for AlwaysSayHello {
        fn name(&self) -> &str {
            "AlwaysSayHelloOrchestrator"
        }

        fn instruct(&mut self, ctx: &mut TurnContext<'_>) -> Option<Instruction> {
            ctx.dialog
                .is_empty()
                .then(|| Instruction::new(self.name(), "Say 'Hello!' as your first utterance."))
        }
    }

    #[test]
    fn custom_orchestrator_event() {
        let mut a = agent("A", scripted(&["Hello!"])) | AlwaysSayHello;
        let (reply, events) = a.respond(None, &Dialog::new()).unwrap();
        assert_eq!(reply, "Hello!");
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].action, Action::Instruct);
        assert_eq!(events[0].text, "Say 'Hello!' as your first utterance.");
        assert_eq!(
            events[0].action_label.as_deref(),
            Some("AlwaysSayHelloOrchestrator")
        );
        // Transient instruction removed again.
        assert_eq!(memory_roles(a.memory()), [Role::System, Role::Assistant]);
    }

    #[test]
    fn persistent_instruction_stays() {
        let plan = InstructionList::new([(0, "Be brief.")]).persistent(true);
        let mut a = agent("A", scripted(&["ok"])) | plan;
        a.respond(None, &Dialog::new()).unwrap();
        assert_eq!(
            memory_roles(a.memory()),
            [Role::System, Role::System, Role::Assistant]
        );
        assert_eq!(a.memory()[1].content, "Be brief.");
    }

    #[test]
    fn orchestrators_fire_in_attachment_order() {
        let mut a = agent("A", scripted(&["x"]))
            | InstructionList::sequence(["first"])
            | Length::new(3, 5).unwrap();
        assert_eq!(
            a.orchestrator_names(),
            ["InstructionListOrchestrator", "LengthOrchestrator"]
        );
        let (_, events) = a.respond(None, &Dialog::new()).unwrap();
        let labels: Vec<_> = events
            .iter()
            .map(|e| e.action_label.clone().unwrap())
            .collect();
        assert_eq!(
            labels,
            ["InstructionListOrchestrator", "LengthOrchestrator"]
        );
    }

    #[test]
    fn same_orchestrator_twice_fires_twice() {
        let mut a = agent("A", scripted(&["x"])) | AlwaysSayHello | AlwaysSayHello;
        let (_, events) = a.respond(None, &Dialog::new()).unwrap();
        assert_eq!(events.len(), 2);
    }

    #[test]
    fn backend_error_still_cleans_memory() {
        let mut a = agent("A", scripted(&[])) | AlwaysSayHello;
        assert!(matches!(
            a.respond(None, &Dialog::new()),
            Err(Error::BackendExhausted)
        ));
        assert_eq!(a.memory().len(), 1);
    }

    #[test]
    fn immediate_end() {
        let mut a = agent("A", scripted(&["Hi! [END]"]));
        let mut b = agent("B", scripted(&[]));
        let d = dialog_with(&mut a, &mut b, &DialogOptions::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.turns[0].text, "Hi!");
    }

    #[test]
    fn bare_end_marker_stops_after_one_exchange() {
        let backend = Arc::new(ScriptedBackend::new(["[END]"], false));
        let mut a = agent("A", backend.clone());
        let mut b = agent("B", scripted(&[]));
        let d = dialog_with(&mut a, &mut b, &DialogOptions::default()).unwrap();
        assert_eq!(backend.calls(), 1);
        assert!(d.is_empty());
    }

    #[test]
    fn max_turns_caps_dialog() {
        let mut a = agent("A", cycling(&["more"]));
        let mut b = agent("B", cycling(&["again"]));
        let opts = DialogOptions {
            max_turns: 4,
            ..Default::default()
        };
        let d = dialog_with(&mut a, &mut b, &opts).unwrap();
        assert_eq!(d.len(), 4);
        let speakers: Vec<_> = d.turns.iter().map(|t| t.speaker.as_str()).collect();
        assert_eq!(speakers, ["A", "B", "A", "B"]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut a = agent("Same", cycling(&["x"]));
        let mut b = agent("Same", cycling(&["x"]));
        assert!(matches!(
            dialog_with(&mut a, &mut b, &DialogOptions::default()),
            Err(Error::DuplicateAgentName(_))
        ));
    }

    #[test]
    fn first_utterance_is_used_verbatim() {
        let mut a = agent("A", cycling(&["generated"])).first_utterance("Welcome!");
        let mut b = agent("B", cycling(&["reply [END]"]));
        let d = dialog_with(&mut a, &mut b, &DialogOptions::default()).unwrap();
        assert_eq!(d.turns[0].text, "Welcome!");
        assert_eq!(d.turns[1].text, "reply");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let run = || {
            let mut a = agent("Alice", cycling(&["Hi", "Sure"]))
                | ChangeMind::new(0.5, ["changed plans"], 3).unwrap();
            let mut b = agent("Bob", cycling(&["Coffee please", "Thanks"]));
            let opts = DialogOptions {
                id: Some(3),
                seed: Some(3),
                max_turns: 8,
                clock: Clock::Logical(1_700_000_000),
            };
            dialog_with(&mut a, &mut b, &opts)
                .unwrap()
                .serialize(Format::Structured)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn reset_clears_memory_and_change_mind_budget() {
        let mut a =
            agent("A", cycling(&["x"])) | ChangeMind::new(1.0, Vec::<String>::new(), 2).unwrap();
        let mut b = agent("B", cycling(&["y"]));
        let opts = DialogOptions {
            seed: Some(1),
            max_turns: 10,
            ..Default::default()
        };
        for _ in 0..2 {
            let d = dialog_with(&mut a, &mut b, &opts).unwrap();
            assert_eq!(d.instructions().count(), 2);
        }
        a.reset(Some(5));
        assert_eq!(a.memory().len(), 1);
        let x: u64 = a.rng().random();
        a.reset(Some(5));
        assert_eq!(x, a.rng().random::<u64>());
    }

    #[test]
    fn end_marker_split() {
        assert_eq!(
            split_end_marker("Bye! [END]", "[END]"),
            ("Bye!".into(), true)
        );
        assert_eq!(split_end_marker("[END]", "[END]"), ("".into(), true));
        assert_eq!(
            split_end_marker(" [END] then more", "[END]"),
            ("[END] then more".into(), false)
        );
    }

    #[test]
    fn derived_seeds_differ_by_position() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
    }
}
