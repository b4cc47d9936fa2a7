//! Default instruction texts used by the built-in orchestrators. Each
//! orchestrator lets callers override its text.

pub const LENGTH_CONTINUE: &str = "Keep the conversation going; do not end it yet.";

/// `{end}` is replaced by the end marker.
pub const LENGTH_FINISH: &str =
    "Wrap up and end the conversation now, finishing your reply with {end}.";

pub const CHANGE_MIND: &str = "Change your mind about your current position.";

/// `{reason}` is replaced by the drawn reason.
pub const CHANGE_MIND_WITH_REASON: &str =
    "Change your mind about your current position because of the following reason: {reason}.";

pub const SUGGESTED_RESPONSES: &str =
    "If appropriate, reply with one of the following suggested responses:";

pub const REFLEX_NAME: &str = "SimpleReflexOrchestrator";
pub const LENGTH_NAME: &str = "LengthOrchestrator";
pub const CHANGE_MIND_NAME: &str = "ChangeMindOrchestrator";
pub const SIMPLE_RESPONSE_NAME: &str = "SimpleResponseOrchestrator";
pub const INSTRUCTION_LIST_NAME: &str = "InstructionListOrchestrator";
