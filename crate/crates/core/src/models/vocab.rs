use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Entity};

pub const UNK: &str = "<unk>";

/// Word, POS and entity-attribute inventories of a training corpus.
///
/// Index 0 of the word and POS lists is the UNK entry. Attribute entries are
/// `key=value` strings plus `kind=<entity kind>`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocab {
    pub words: Vec<String>,
    pub pos: Vec<String>,
    pub attrs: Vec<String>,
    #[serde(skip)]
    word_index: HashMap<String, usize>,
    #[serde(skip)]
    pos_index: HashMap<String, usize>,
    #[serde(skip)]
    attr_index: HashMap<String, usize>,
}

fn entity_attrs(e: &Entity) -> impl Iterator<Item = String> + '_ {
    std::iter::once(format!("kind={}", e.kind.label())).chain(e.attrs.iter().map(|(k, v)| format!("{k}={v}")))
}

fn index_of(items: &[String]) -> HashMap<String, usize> {
    items.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

impl Vocab {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Self {
        let (mut words, mut pos, mut attrs) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for doc in docs {
            for t in doc.tokens() {
                words.insert(t.surface.clone());
                if let Some(p) = &t.pos {
                    pos.insert(p.clone());
                }
            }
            for e in doc.entities().iter().filter(|e| e.span.is_some()) {
                attrs.extend(entity_attrs(e));
            }
        }
        let with_unk = |s: BTreeSet<String>| std::iter::once(UNK.to_string()).chain(s.into_iter().filter(|w| w != UNK)).collect();
        Vocab::from_parts(with_unk(words), with_unk(pos), attrs.into_iter().collect())
    }

    /// Rebuilds the lookup tables, e.g. after deserializing.
    pub fn from_parts(words: Vec<String>, pos: Vec<String>, attrs: Vec<String>) -> Self {
        Vocab {
            word_index: index_of(&words),
            pos_index: index_of(&pos),
            attr_index: index_of(&attrs),
            words,
            pos,
            attrs,
        }
    }

    pub fn word(&self, w: &str) -> usize {
        self.word_index.get(w).copied().unwrap_or(0)
    }

    pub fn pos_tag(&self, p: Option<&str>) -> usize {
        p.and_then(|p| self.pos_index.get(p).copied()).unwrap_or(0)
    }

    /// Boolean attribute block of an entity; entries outside the catalog
    /// are ignored.
    pub fn attr_vector(&self, e: Option<&Entity>) -> Vec<f64> {
        let mut v = vec![0.0; self.attrs.len()];
        if let Some(e) = e {
            for a in entity_attrs(e) {
                if let Some(&i) = self.attr_index.get(&a) {
                    v[i] = 1.0;
                }
            }
        }
        v
    }
}

/// The entity whose span covers each token, if any.
pub fn covering_entities(doc: &Document) -> Vec<Option<&Entity>> {
    let mut out = vec![None; doc.tokens().len()];
    for e in doc.entities() {
        if let Some((a, b)) = e.span {
            for slot in &mut out[a..=b] {
                *slot = Some(e);
            }
        }
    }
    out
}
