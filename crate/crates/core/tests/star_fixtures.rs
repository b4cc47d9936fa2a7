use std::path::PathBuf;
use std::sync::Arc;

use dialogforge::agent::{dialog_with, DialogOptions};
use dialogforge::backend::ScriptedBackend;
use dialogforge::scenario::{describe_scenario, DatasetRoot, USER_NAME, WIZARD_NAME};
use dialogforge::Error;

fn root() -> DatasetRoot {
    DatasetRoot::new(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/star")).unwrap()
}

#[test]
fn dialog_123_has_scenario_attached() {
    let d = root().load_dialog(123).unwrap();
    assert_eq!(d.id, Some(123));
    let scenario = d.scenario.as_ref().unwrap();
    assert_eq!(scenario["UserTask"], "Open a new account");
    assert_eq!(d.turns[0].speaker, WIZARD_NAME);
    d.validate().unwrap();
}

#[test]
fn scenario_ids_load() {
    let root = root();
    for id in [101, 102, 103] {
        assert_eq!(root.load_dialog(id).unwrap().id, Some(id));
        root.load_scenario(id).unwrap();
    }
    assert!(matches!(root.load_dialog(999), Err(Error::NotFound(999))));
}

#[test]
fn banking_description() {
    let s = root().load_scenario(123).unwrap();
    let text = describe_scenario(&s);
    assert!(text.contains("banking"));
    assert!(text.contains("Open a new account"));
    assert!(text.contains("can open_account in banking"));
}

#[test]
fn wizard_rules_include_flowchart_steps() {
    let root = root();
    let s = root.load_scenario(123).unwrap();
    let backend = Arc::new(ScriptedBackend::new(
        [
            "Hello, how can I help?",
            "Open an account please.",
            "Done. [END]",
        ],
        false,
    ));
    let (mut wizard, mut user) = root.agents_for_scenario(&s, backend).unwrap();
    let rules = wizard.persona().rules.clone().unwrap();
    assert!(rules.contains("open_account"));
    assert!(rules.contains(
        "1. Greet the user and ask how you can help\n\
         2. Ask for the user's full name\n\
         3. Verify the user's identity\n   \
         (if verification failed: back to step 2)\n\
         4. Open the account and confirm [if verified]"
    ));
    assert_eq!(user.persona().role.as_deref(), Some("user"));

    let d = dialog_with(&mut wizard, &mut user, &DialogOptions::seeded(123, 1)).unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(d.turns[1].speaker, USER_NAME);
    d.validate().unwrap();
}

#[test]
fn flowchart_exports_to_dot() {
    let chart = root()
        .load_flowchart("banking", "open_account")
        .unwrap()
        .unwrap();
    let g = chart.to_flow_graph();
    g.check_normalized(1e-12).unwrap();
    let dot = dialogforge::flow_to_dot(&g);
    assert!(dot.contains("\"verify\" -> \"name\""));
}
