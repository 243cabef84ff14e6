//! Annotated documents and their on-disk formats.
//!
//! A [`Document`] holds lowercased tokens, the temporal entities annotated
//! over them (events, temporal expressions and exactly one document-creation
//! time), and the gold temporal links between entities. Documents are
//! validated on construction and immutable afterwards.

mod embeddings;
mod json;
mod synth;
mod timeml;
mod tokenize;

pub use embeddings::load_embeddings;
pub use json::{parse_json_corpus, parse_json_lines, parse_json_lines_each, serialize_json, write_json_corpus};
pub use synth::{generate_synthetic, generate_synthetic_with_truth, SynthConfig, SynthDoc};
pub use timeml::{parse_timeml_str, parse_timeml_subset};
pub use tokenize::tokenize;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointalg::{TLinkType, UnknownRelation};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("document {doc:?}: {message}")]
    Validation { doc: String, message: String },
    #[error(transparent)]
    Relation(#[from] UnknownRelation),
    #[error("invalid synthetic corpus config: {0}")]
    Config(String),
}

impl CorpusError {
    fn invalid(doc: &str, message: impl Into<String>) -> Self {
        CorpusError::Validation { doc: doc.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub pos: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    #[serde(rename = "EVENT")]
    Event,
    #[serde(rename = "TIMEX")]
    Timex,
    #[serde(rename = "DCT")]
    Dct,
}

impl EntityKind {
    pub fn label(self) -> &'static str {
        match self {
            EntityKind::Event => "EVENT",
            EntityKind::Timex => "TIMEX",
            EntityKind::Dct => "DCT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
    /// Inclusive token range; `None` only for the DCT.
    pub span: Option<(usize, usize)>,
    pub attrs: BTreeMap<String, String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, kind: EntityKind, span: Option<(usize, usize)>) -> Self {
        Entity { id: id.into(), kind, span, attrs: BTreeMap::new() }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }

    /// Index of the last token of the mention.
    pub fn head(&self) -> Option<usize> {
        self.span.map(|(_, last)| last)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TLink {
    pub source: String,
    pub target: String,
    pub relation: TLinkType,
}

impl TLink {
    pub fn new(source: impl Into<String>, target: impl Into<String>, relation: TLinkType) -> Self {
        TLink { source: source.into(), target: target.into(), relation }
    }
}

/// One annotated text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    tokens: Vec<Token>,
    entities: Vec<Entity>,
    tlinks: Vec<TLink>,
    index: HashMap<String, usize>,
    dct: usize,
}

impl Document {
    /// Builds a document from raw token surfaces/POS tags, validating every
    /// invariant: non-empty surfaces (lowercased here), unique entity ids,
    /// exactly one DCT without a span, in-range spans for all other
    /// entities, and TLinks between two distinct, known entities.
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<(String, Option<String>)>,
        entities: Vec<Entity>,
        tlinks: Vec<TLink>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let tokens: Vec<Token> = tokens
            .into_iter()
            .enumerate()
            .map(|(index, (surface, pos))| Token { index, surface: surface.to_lowercase(), pos })
            .collect();
        if let Some(t) = tokens.iter().find(|t| t.surface.is_empty()) {
            return Err(CorpusError::invalid(&id, format!("token {} has an empty surface", t.index)));
        }

        let mut index = HashMap::with_capacity(entities.len());
        let mut dcts = Vec::new();
        for (i, e) in entities.iter().enumerate() {
            if index.insert(e.id.clone(), i).is_some() {
                return Err(CorpusError::invalid(&id, format!("duplicate entity id {:?}", e.id)));
            }
            match (e.kind, e.span) {
                (EntityKind::Dct, None) => dcts.push(i),
                (EntityKind::Dct, Some(_)) => {
                    return Err(CorpusError::invalid(&id, format!("DCT {:?} must not have a span", e.id)))
                }
                (_, None) => return Err(CorpusError::invalid(&id, format!("entity {:?} has no span", e.id))),
                (_, Some((first, last))) => {
                    if first > last || last >= tokens.len() {
                        return Err(CorpusError::invalid(
                            &id,
                            format!("entity {:?} span [{first}, {last}] outside 0..{}", e.id, tokens.len()),
                        ));
                    }
                }
            }
        }
        let dct = match dcts.as_slice() {
            [one] => *one,
            [] => return Err(CorpusError::invalid(&id, "no DCT entity")),
            _ => return Err(CorpusError::invalid(&id, format!("{} DCT entities, expected exactly one", dcts.len()))),
        };

        for l in &tlinks {
            for end in [&l.source, &l.target] {
                if !index.contains_key(end) {
                    return Err(CorpusError::invalid(&id, format!("TLink endpoint {end:?} does not resolve to an entity")));
                }
            }
            if l.source == l.target {
                return Err(CorpusError::invalid(&id, format!("TLink relates {:?} to itself", l.source)));
            }
        }

        Ok(Document { id, tokens, entities, tlinks, index, dct })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn tlinks(&self) -> &[TLink] {
        &self.tlinks
    }

    pub fn entity_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entity_index(id).map(|i| &self.entities[i])
    }

    pub fn dct_index(&self) -> usize {
        self.dct
    }

    pub fn dct(&self) -> &Entity {
        &self.entities[self.dct]
    }

    /// Text of an entity mention (`"DCT"` for the document-creation time).
    pub fn surface(&self, entity: &Entity) -> String {
        match entity.span {
            Some((a, b)) => self.tokens[a..=b].iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" "),
            None => "DCT".to_string(),
        }
    }

    /// Same document with a different TLink set, revalidated.
    pub fn with_tlinks(&self, tlinks: Vec<TLink>) -> Result<Document, CorpusError> {
        Document::new(
            self.id.clone(),
            self.tokens.iter().map(|t| (t.surface.clone(), t.pos.clone())).collect(),
            self.entities.clone(),
            tlinks,
        )
    }

    /// TLinks as `(source index, target index, relation)`.
    pub fn indexed_tlinks(&self) -> Vec<(usize, usize, TLinkType)> {
        self.tlinks.iter().map(|l| (self.index[&l.source], self.index[&l.target], l.relation)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<(String, Option<String>)> {
        words.iter().map(|w| (w.to_string(), None)).collect()
    }

    #[test]
    fn validates_invariants() {
        let dct = Entity::new("t0", EntityKind::Dct, None);
        let e1 = Entity::new("e1", EntityKind::Event, Some((0, 0)));
        let ok = Document::new("d", toks(&["Ran", "home"]), vec![dct.clone(), e1.clone()], vec![]).unwrap();
        assert_eq!(ok.tokens()[0].surface, "ran");
        assert_eq!(ok.dct_index(), 0);

        let err = Document::new("d", toks(&["ran"]), vec![e1.clone()], vec![]).unwrap_err();
        assert!(err.to_string().contains("no DCT"));
        let err = Document::new("d", toks(&["ran"]), vec![dct.clone(), dct.clone()], vec![]).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let bad_span = Entity::new("e2", EntityKind::Event, Some((1, 3)));
        assert!(Document::new("d", toks(&["a", "b"]), vec![dct.clone(), bad_span], vec![]).is_err());
        let link = TLink::new("e1", "e9", TLinkType::Before);
        let err = Document::new("d", toks(&["ran"]), vec![dct.clone(), e1.clone()], vec![link]).unwrap_err();
        assert!(err.to_string().contains("e9"));
        let self_link = TLink::new("e1", "e1", TLinkType::Before);
        assert!(Document::new("d", toks(&["ran"]), vec![dct, e1], vec![self_link]).is_err());
    }
}
