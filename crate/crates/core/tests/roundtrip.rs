use std::collections::BTreeMap;

use dialogforge::dialog::{Dialog, Event, Format};
use dialogforge::Persona;
use proptest::prelude::*;
use serde_json::{json, Map, Value};

fn speaker() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("Alice".to_string()),
        Just("Bob".to_string()),
        "[A-Z][a-z]{0,8}( [A-Z][a-z]{0,6})?",
        "[\\p{L}][\\p{L}\\p{N}_-]{0,10}",
    ]
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[ -~]{0,60}",
        "\\PC{0,40}",
        // line breaks, backslashes and separators inside the text
        "[a-z :\\\\\n\r\t\"]{0,30}",
    ]
    .prop_map(|t| {
        // a single trailing line break is stripped on construction
        let mut t = t;
        if t.ends_with('\n') {
            t.push('.');
        }
        t
    })
}

prop_compose! {
    fn dialog()(
        turns in prop::collection::vec((speaker(), text(), any::<bool>(), 0i64..5), 0..12),
        id in prop::option::of(any::<u64>()),
        seed in prop::option::of(any::<u64>()),
        model in prop::option::of("[a-z0-9.-]{1,12}"),
        with_meta in any::<bool>(),
    ) -> Dialog {
        let mut d = Dialog::new();
        d.id = id;
        d.seed = seed;
        d.model = model;
        let mut ts = 1_700_000_000;
        for (speaker, text, instructed, step) in turns {
            ts += step;
            if instructed {
                d.push_event(Event::instruct(speaker.clone(), "LengthOrchestrator", "keep going", ts)).unwrap();
            }
            d.append_utterance(speaker, text, ts).unwrap();
        }
        if with_meta {
            let mut scenario = Map::new();
            scenario.insert("Domains".into(), json!(["banking"]));
            scenario.insert("Happy".into(), Value::Bool(true));
            d.scenario = Some(scenario);
            let mut personas = BTreeMap::new();
            personas.insert("Alice".into(), Persona::new("Alice").role("customer").language("en"));
            d.personas = Some(personas);
        }
        d
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn structured_round_trip(d in dialog()) {
        let text = d.serialize(Format::Structured).unwrap();
        let back = Dialog::deserialize(&text, Format::Structured).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(back.serialize(Format::Structured).unwrap(), text);
    }

    #[test]
    fn plain_projection_keeps_turns(d in dialog()) {
        let text = d.serialize(Format::Plain).unwrap();
        let back = Dialog::deserialize(&text, Format::Plain).unwrap();
        prop_assert_eq!(back.turns, d.turns);
    }
}

#[test]
fn files_round_trip_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let mut d = Dialog::new();
    d.append_utterance("Alice", "Hi\nthere", 1).unwrap();
    d.append_utterance("Bob", "C:\\path", 2).unwrap();
    for name in ["nested/d.json", "d.txt"] {
        let path = dir.path().join(name);
        d.to_file(&path).unwrap();
        let back = Dialog::from_file(&path).unwrap();
        assert_eq!(back.turns, d.turns);
    }
    assert!(d.to_file(dir.path().join("d.csv")).is_err());
}
