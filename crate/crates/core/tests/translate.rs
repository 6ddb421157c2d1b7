use eckit::difftest::{difftest, gen_automaton, gen_case, gen_up_word, still_mismatches, GenConfig};
use eckit::format::{
    automaton_from_json, automaton_to_json, upword_from_dto, upword_from_json, upword_to_json,
};
use eckit::model::Automaton;
use eckit::translate::{remove_clock, Mutation, TranslateOptions};
use eckit::words::EventKind;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_removals_meet_their_bounds(seed in any::<u64>(), kind in 0..4usize) {
        let cfg = GenConfig::for_kind(EventKind::ALL[kind]);
        let a = gen_automaton(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
        let (y, _) = a.event_clocks().next().expect("one event clock");
        let (out, st) = remove_clock(&a, y, TranslateOptions::default()).unwrap();
        prop_assert!(st.states_ok(), "{st:?}");
        prop_assert!(st.clocks_ok(), "{st:?}");
        prop_assert_eq!(out.max_constant(), a.max_constant());
        prop_assert!(!out.has_event_clocks());
        if st.kind == EventKind::AbsPredictor {
            prop_assert_eq!(out.clocks.len(), a.clocks.len() - 1 + st.lower_bounds + st.upper_bounds);
        }
        prop_assert!(out.transitions.iter().all(|t| t.guard.iter().all(|g| (g.clock as usize) < out.clocks.len())));
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let cfg = GenConfig::mixed();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen_automaton(&cfg, &mut rng);
        let text = automaton_to_json(&a);
        let back = automaton_from_json(&text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(automaton_to_json(&back), text);
        let w = gen_up_word(&cfg, a.props.len(), &mut rng);
        let text = upword_to_json(&w, &a.props);
        let (back, props) = upword_from_json(&text).unwrap();
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(upword_to_json(&back, &props), text);
    }
}

#[test]
fn removed_clock_leaves_no_atoms() {
    let cfg = GenConfig { event_clocks: 2, ..GenConfig::default() };
    for i in 0..50 {
        let (a, _) = gen_case(&cfg, i);
        for (y, _) in a.event_clocks() {
            let name = a.clocks[y as usize].name.clone();
            let (out, _) = remove_clock(&a, y, TranslateOptions::default()).unwrap();
            assert!(out.clock_id(&name).is_none());
            assert_eq!(out.event_clocks().count(), a.event_clocks().count() - 1);
            for (z, _) in out.event_clocks() {
                assert!(a.clock_id(&out.clocks[z as usize].name).is_some());
            }
        }
    }
}

#[test]
fn reports_are_byte_identical_for_equal_configs() {
    let cfg = GenConfig { cases: 10, words_per_case: 5, seed: 42, ..GenConfig::mixed() };
    let a = serde_json::to_string(&difftest(&cfg)).unwrap();
    let b = serde_json::to_string(&difftest(&cfg)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shrunk_case_still_mismatches_and_is_smaller() {
    let cfg = GenConfig {
        cases: 20,
        words_per_case: 20,
        mutation: Some(Mutation::DropBadBranch),
        ..GenConfig::for_kind(EventKind::AbsPredictor)
    };
    let report = difftest(&cfg);
    let first = report.mismatches.first().expect("the mutation is caught");
    let shrunk = report.shrunk.as_ref().expect("first mismatch is shrunk");
    assert_eq!(shrunk.case, first.case);
    let a = Automaton::try_from(&shrunk.automaton).unwrap();
    let w = upword_from_dto(&shrunk.word, &shrunk.word.props).unwrap();
    let opts = TranslateOptions { mutation: cfg.mutation };
    assert!(still_mismatches(&a, &w, &shrunk.removal, opts));
    let original = Automaton::try_from(&first.automaton).unwrap();
    assert!(a.states.len() <= original.states.len());
    assert!(a.transitions.len() <= original.transitions.len());
    let size = |d: &eckit::format::UpWordDto| d.prefix.len() + d.period.len();
    assert!(size(&shrunk.word) <= size(&first.word));
}
