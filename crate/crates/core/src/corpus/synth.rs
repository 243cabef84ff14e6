//! Synthetic annotated corpora with a known time-line.
//!
//! Every entity is drawn from one of a fixed set of temporal classes, each
//! with a canonical interval relative to the DCT `[0, 12]`. The class
//! intervals form a laminar family (any two are nested, disjoint or share an
//! end point), so every entity pair has a TimeML relation and the emitted
//! TLinks, read off the hidden intervals, are consistent by construction.
//!
//! The class of an entity is signalled by a cue word. In the default mode the
//! cue is the entity's head word itself; in the context-dependent mode the
//! head is drawn from a small class-independent noun set and the cue sits
//! just before the mention, outside its span.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Document, Entity, EntityKind, TLink};
use crate::pointalg::{interpret, PointOp, Side, TLinkType};

struct Class {
    interval: (i64, i64),
    cues: [&'static str; 4],
}

const DCT_INTERVAL: (i64, i64) = (0, 12);

const CLASSES: [Class; 12] = [
    Class { interval: (-30, -24), cues: ["conquered", "founded", "colonized", "excavated"] },
    Class { interval: (-20, -14), cues: ["fought", "signed", "negotiated", "ratified"] },
    Class { interval: (-22, -12), cues: ["war", "reign", "regime", "occupation"] },
    Class { interval: (-6, 0), cues: ["prepared", "rehearsed", "drafted", "assembled"] },
    Class { interval: (0, 4), cues: ["opens", "begins", "starts", "launches"] },
    Class { interval: (5, 7), cues: ["announces", "visits", "says", "reports"] },
    Class { interval: (8, 12), cues: ["closes", "concludes", "finishes", "adjourns"] },
    Class { interval: (0, 12), cues: ["today", "meanwhile", "currently", "presently"] },
    Class { interval: (12, 15), cues: ["aftermath", "reaction", "response", "fallout"] },
    Class { interval: (16, 22), cues: ["will", "plans", "expects", "intends"] },
    Class { interval: (26, 32), cues: ["eventually", "someday", "decades", "future"] },
    Class { interval: (-32, 34), cues: ["era", "century", "history", "tradition"] },
];

const HEADS: [&str; 4] = ["event", "meeting", "incident", "episode"];
const FILLER: [&str; 10] = ["the", "a", "of", "and", "then", "it", "was", "that", "in", "on"];
const EVENT_CLASSES: [&str; 3] = ["OCCURRENCE", "STATE", "REPORTING"];
const TIMEX_TYPES: [&str; 2] = ["DATE", "DURATION"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub docs: usize,
    pub entities_per_doc: usize,
    /// Fraction of entity pairs that receive a TLink, in (0, 1].
    pub density: f64,
    /// Probability that an entity is linked to the DCT, in [0, 1].
    pub dct_link_rate: f64,
    /// Cue word outside the entity span, head word uninformative.
    pub context_dependent: bool,
    /// Cue words used per class, 1..=4.
    pub words_per_class: usize,
    pub min_filler: usize,
    pub max_filler: usize,
    /// Probability that an entity is a temporal expression rather than an event.
    pub timex_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs: 10,
            entities_per_doc: 5,
            density: 1.0,
            dct_link_rate: 1.0,
            context_dependent: false,
            words_per_class: 3,
            min_filler: 1,
            max_filler: 3,
            timex_rate: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |m: String| Err(CorpusError::Config(m));
        if !(self.density > 0.0 && self.density <= 1.0) {
            return fail(format!("density must be in (0, 1], got {}", self.density));
        }
        if !(0.0..=1.0).contains(&self.dct_link_rate) {
            return fail(format!("dct_link_rate must be in [0, 1], got {}", self.dct_link_rate));
        }
        if self.entities_per_doc == 0 {
            return fail("entities_per_doc must be at least 1 (no DCT-linkable entity)".into());
        }
        if !(1..=4).contains(&self.words_per_class) {
            return fail(format!("words_per_class must be in 1..=4, got {}", self.words_per_class));
        }
        if self.min_filler > self.max_filler {
            return fail("min_filler exceeds max_filler".into());
        }
        if !(0.0..=1.0).contains(&self.timex_rate) {
            return fail(format!("timex_rate must be in [0, 1], got {}", self.timex_rate));
        }
        Ok(())
    }
}

/// A generated document with its hidden time-line: `(start, end)` per
/// entity, in document entity order (DCT first).
#[derive(Debug, Clone)]
pub struct SynthDoc {
    pub doc: Document,
    pub truth: Vec<(f64, f64)>,
    /// Temporal class per entity (`None` for the DCT).
    pub classes: Vec<Option<usize>>,
}

/// Exact relation between two integer intervals, if it has a TimeML name.
fn exact_relation(x: (i64, i64), y: (i64, i64)) -> Option<TLinkType> {
    let point = |iv: (i64, i64), side: Side| match side {
        Side::Start => iv.0,
        Side::End => iv.1,
    };
    TLinkType::ALL.into_iter().find(|&r| {
        interpret(r, 0usize, 1usize).iter().all(|c| {
            let iv = |e: usize| if e == 0 { x } else { y };
            let (a, b) = (point(iv(c.lhs.entity), c.lhs.side), point(iv(c.rhs.entity), c.rhs.side));
            match c.op {
                PointOp::Less => a < b,
                PointOp::Equal => a == b,
            }
        })
    })
}

pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<Vec<Document>, CorpusError> {
    Ok(generate_synthetic_with_truth(config, seed)?.into_iter().map(|s| s.doc).collect())
}

pub fn generate_synthetic_with_truth(config: &SynthConfig, seed: u64) -> Result<Vec<SynthDoc>, CorpusError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..config.docs).map(|i| generate_doc(config, &mut rng, i)).collect()
}

fn generate_doc(config: &SynthConfig, rng: &mut ChaCha8Rng, doc_no: usize) -> Result<SynthDoc, CorpusError> {
    let mut tokens: Vec<(String, Option<String>)> = Vec::new();
    let mut entities = vec![Entity::new("t0", EntityKind::Dct, None).with_attr("type", "DATE")];
    let mut truth = vec![(DCT_INTERVAL.0 as f64, DCT_INTERVAL.1 as f64)];
    let mut intervals = vec![DCT_INTERVAL];
    let mut classes = vec![None];
    let (mut n_events, mut n_timex) = (0, 0);

    let push = |tokens: &mut Vec<(String, Option<String>)>, w: &str, pos: &str| {
        tokens.push((w.to_string(), Some(pos.to_string())));
        tokens.len() - 1
    };

    for _ in 0..config.entities_per_doc {
        for _ in 0..rng.gen_range(config.min_filler..=config.max_filler) {
            push(&mut tokens, FILLER.choose(rng).unwrap(), "DT");
        }
        let class = rng.gen_range(0..CLASSES.len());
        let cue = CLASSES[class].cues[rng.gen_range(0..config.words_per_class)];
        let span = if config.context_dependent {
            push(&mut tokens, cue, "RB");
            let head = push(&mut tokens, HEADS.choose(rng).unwrap(), "NN");
            (head, head)
        } else if rng.gen_bool(0.3) {
            let first = push(&mut tokens, "the", "DT");
            let head = push(&mut tokens, cue, "NN");
            (first, head)
        } else {
            let head = push(&mut tokens, cue, "VB");
            (head, head)
        };
        let entity = if rng.gen_bool(config.timex_rate) {
            n_timex += 1;
            Entity::new(format!("t{n_timex}"), EntityKind::Timex, Some(span))
                .with_attr("type", *TIMEX_TYPES.choose(rng).unwrap())
        } else {
            n_events += 1;
            Entity::new(format!("e{n_events}"), EntityKind::Event, Some(span))
                .with_attr("class", *EVENT_CLASSES.choose(rng).unwrap())
        };
        entities.push(entity);
        let iv = CLASSES[class].interval;
        intervals.push(iv);
        truth.push((iv.0 as f64, iv.1 as f64));
        classes.push(Some(class));
    }
    push(&mut tokens, ".", ".");

    let mut tlinks = Vec::new();
    let n = entities.len();
    for i in 1..n {
        for j in (i + 1)..n {
            if config.density >= 1.0 || rng.gen_bool(config.density) {
                let rel = exact_relation(intervals[i], intervals[j]).expect("class intervals are laminar");
                tlinks.push(TLink::new(entities[i].id.clone(), entities[j].id.clone(), rel));
            }
        }
    }
    for i in 1..n {
        if config.dct_link_rate >= 1.0 || (config.dct_link_rate > 0.0 && rng.gen_bool(config.dct_link_rate)) {
            let rel = exact_relation(intervals[i], DCT_INTERVAL).expect("class intervals are laminar with the DCT");
            tlinks.push(TLink::new(entities[i].id.clone(), "t0", rel));
        }
    }
    if tlinks.is_empty() {
        // Every document carries at least one annotation.
        let rel = exact_relation(intervals[1], DCT_INTERVAL).expect("laminar");
        tlinks.push(TLink::new(entities[1].id.clone(), "t0", rel));
    }

    let doc = Document::new(format!("doc{doc_no:04}"), tokens, entities, tlinks)?;
    Ok(SynthDoc { doc, truth, classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_json_corpus;
    use crate::pointalg::is_consistent;

    #[test]
    fn class_intervals_are_laminar() {
        let all: Vec<(i64, i64)> = CLASSES.iter().map(|c| c.interval).chain([DCT_INTERVAL]).collect();
        for &a in &all {
            for &b in &all {
                assert!(exact_relation(a, b).is_some(), "{a:?} {b:?}");
            }
        }
        assert_eq!(exact_relation((-6, 0), DCT_INTERVAL), Some(TLinkType::IBefore));
        assert_eq!(exact_relation((0, 4), DCT_INTERVAL), Some(TLinkType::Begins));
        assert_eq!(exact_relation((-32, 34), DCT_INTERVAL), Some(TLinkType::Includes));
    }

    #[test]
    fn full_density_links_every_pair() {
        let cfg = SynthConfig { docs: 10, entities_per_doc: 5, density: 1.0, ..Default::default() };
        let docs = generate_synthetic(&cfg, 7).unwrap();
        assert_eq!(docs.len(), 10);
        for d in &docs {
            let pairs = d.tlinks().iter().filter(|l| l.target != "t0").count();
            assert_eq!(pairs, 10);
            assert_eq!(d.tlinks().len(), 15);
            assert!(is_consistent(d.tlinks()));
        }
    }

    #[test]
    fn partial_density_is_consistent_with_truth() {
        let cfg = SynthConfig { docs: 40, entities_per_doc: 8, density: 0.3, ..Default::default() };
        let docs = generate_synthetic_with_truth(&cfg, 7).unwrap();
        let (mut got, mut possible) = (0usize, 0usize);
        for s in &docs {
            let n = s.doc.entities().len() - 1;
            possible += n * (n - 1) / 2;
            got += s.doc.tlinks().iter().filter(|l| l.target != "t0").count();
            for l in s.doc.tlinks() {
                let (a, b) = (s.doc.entity_index(&l.source).unwrap(), s.doc.entity_index(&l.target).unwrap());
                let iv = |k: usize| (s.truth[k].0 as i64, s.truth[k].1 as i64);
                assert_eq!(exact_relation(iv(a), iv(b)), Some(l.relation));
            }
        }
        let share = got as f64 / possible as f64;
        assert!((share - 0.3).abs() < 0.05, "{share}");
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = SynthConfig { context_dependent: true, ..Default::default() };
        let a = write_json_corpus(&generate_synthetic(&cfg, 3).unwrap());
        let b = write_json_corpus(&generate_synthetic(&cfg, 3).unwrap());
        assert_eq!(a, b);
        let c = write_json_corpus(&generate_synthetic(&cfg, 4).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn cue_placement() {
        let cfg = SynthConfig { context_dependent: true, docs: 3, ..Default::default() };
        for s in generate_synthetic_with_truth(&cfg, 1).unwrap() {
            for (e, class) in s.doc.entities().iter().zip(&s.classes).skip(1) {
                let (first, last) = e.span.unwrap();
                assert_eq!(first, last);
                assert!(HEADS.contains(&s.doc.tokens()[last].surface.as_str()));
                let cue = &s.doc.tokens()[first - 1].surface;
                assert!(CLASSES[class.unwrap()].cues.contains(&cue.as_str()));
            }
        }
    }

    #[test]
    fn config_errors() {
        for bad in [
            SynthConfig { density: 0.0, ..Default::default() },
            SynthConfig { density: 1.5, ..Default::default() },
            SynthConfig { entities_per_doc: 0, ..Default::default() },
        ] {
            assert!(matches!(generate_synthetic(&bad, 1), Err(CorpusError::Config(_))));
        }
    }
}
