use eckit::difftest::{gen_automaton, gen_up_word, GenConfig};
use eckit::engine::{accepts, run_prefix, trace, Configuration};
use eckit::model::normalize_for_clock;
use eckit::translate::{remove_all_event_clocks, TranslateOptions};
use eckit::words::TimedNestedWord;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_automata_pass_through_the_pipeline(seed in any::<u64>()) {
        let cfg = GenConfig { event_clocks: 0, ..GenConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen_automaton(&cfg, &mut rng);
        let (b, stats) = remove_all_event_clocks(&a, TranslateOptions::default()).unwrap();
        prop_assert!(stats.steps.is_empty());
        prop_assert_eq!(&b, &a);
        for _ in 0..10 {
            let w = gen_up_word(&cfg, a.props.len(), &mut rng);
            prop_assert_eq!(accepts(&a, &w).unwrap(), accepts(&b, &w).unwrap());
        }
    }

    #[test]
    fn normalization_keeps_the_language(seed in any::<u64>()) {
        let cfg = GenConfig::mixed();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen_automaton(&cfg, &mut rng);
        for (y, _) in a.event_clocks() {
            let n = normalize_for_clock(&a, y);
            prop_assert_eq!(&n.states, &a.states);
            prop_assert_eq!(&n.initial, &a.initial);
            prop_assert_eq!(&n.acceptance, &a.acceptance);
            prop_assert!(n.transitions.len() <= 2 * a.transitions.len());
            for _ in 0..5 {
                let w = gen_up_word(&cfg, a.props.len(), &mut rng);
                prop_assert_eq!(accepts(&a, &w).unwrap(), accepts(&n, &w).unwrap());
            }
        }
    }

    #[test]
    fn trace_extends_run_prefix(seed in any::<u64>()) {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen_automaton(&cfg, &mut rng);
        let w = gen_up_word(&cfg, a.props.len(), &mut rng).unroll(1);
        let steps = trace(&a, &w).unwrap();
        prop_assert_eq!(steps.len(), w.len() + 1);
        prop_assert_eq!(&steps[0], &Configuration::initial(&a));
        prop_assert_eq!(steps.last().unwrap(), &run_prefix(&a, &w).unwrap());
    }
}

#[test]
fn empty_word_leaves_the_initial_configurations() {
    let a = gen_automaton(&GenConfig::default(), &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(run_prefix(&a, &TimedNestedWord::empty()).unwrap(), Configuration::initial(&a));
}
