use proptest::prelude::*;
use reltime::corpus::{generate_synthetic, parse_json_lines, write_json_corpus, SynthConfig};
use reltime::pointalg::is_consistent;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthetic_corpus_survives_json_lines(
        seed in any::<u64>(),
        entities in 2usize..12,
        density in prop::sample::select(vec![0.3, 0.6, 1.0]),
        context_dependent in any::<bool>(),
        timex_rate in 0.0f64..0.5,
    ) {
        let cfg = SynthConfig { docs: 3, entities_per_doc: entities, density, context_dependent, timex_rate, ..SynthConfig::default() };
        let docs = generate_synthetic(&cfg, seed).unwrap();
        let text = write_json_corpus(&docs);
        prop_assert_eq!(text.lines().count(), 3);
        let back = parse_json_lines(&text).unwrap();
        prop_assert_eq!(&back, &docs);
        prop_assert_eq!(write_json_corpus(&back), text);
        for d in &docs {
            prop_assert!(is_consistent(d.tlinks()));
            prop_assert_eq!(d.entities().len(), entities + 1);
        }
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let cfg = SynthConfig::default();
    assert_eq!(generate_synthetic(&cfg, 5).unwrap(), generate_synthetic(&cfg, 5).unwrap());
    assert_ne!(generate_synthetic(&cfg, 5).unwrap(), generate_synthetic(&cfg, 6).unwrap());
}
