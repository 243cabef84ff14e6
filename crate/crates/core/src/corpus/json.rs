//! JSON-lines corpus format: one document object per line.
//!
//! ```text
//! {"id":"d1","tokens":[{"t":"ran","pos":"VBD"}],"entities":[{"id":"t0","kind":"DCT","attrs":{}},
//!  {"id":"e1","kind":"EVENT","span":[0,0],"attrs":{"class":"OCCURRENCE"}}],"tlinks":[...]}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Document, Entity, EntityKind, TLink};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireToken {
    t: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEntity {
    id: String,
    kind: EntityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    span: Option<[usize; 2]>,
    #[serde(default)]
    attrs: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDoc {
    id: String,
    tokens: Vec<WireToken>,
    entities: Vec<WireEntity>,
    #[serde(default)]
    tlinks: Vec<TLink>,
}

fn from_wire(w: WireDoc) -> Result<Document, CorpusError> {
    let tokens = w.tokens.into_iter().map(|t| (t.t, t.pos)).collect();
    let entities = w
        .entities
        .into_iter()
        .map(|e| Entity { id: e.id, kind: e.kind, span: e.span.map(|[a, b]| (a, b)), attrs: e.attrs })
        .collect();
    Document::new(w.id, tokens, entities, w.tlinks)
}

/// Parses JSON-lines text. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn parse_json_lines(text: &str) -> Result<Vec<Document>, CorpusError> {
    parse_json_lines_each(text).into_iter().map(|(_, d)| d).collect()
}

/// One result per non-blank line, with its 1-based line number, so a bad
/// document does not hide the others.
pub fn parse_json_lines_each(text: &str) -> Vec<(usize, Result<Document, CorpusError>)> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            let doc = serde_json::from_str::<WireDoc>(line)
                .map_err(|e| CorpusError::Parse { line: i + 1, message: e.to_string() })
                .and_then(from_wire);
            (i + 1, doc)
        })
        .collect()
}

pub fn parse_json_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_json_lines(&text)
}

/// One document as a single JSON line (no trailing newline).
pub fn serialize_json(doc: &Document) -> String {
    let wire = WireDoc {
        id: doc.id().to_string(),
        tokens: doc.tokens().iter().map(|t| WireToken { t: t.surface.clone(), pos: t.pos.clone() }).collect(),
        entities: doc
            .entities()
            .iter()
            .map(|e| WireEntity { id: e.id.clone(), kind: e.kind, span: e.span.map(|(a, b)| [a, b]), attrs: e.attrs.clone() })
            .collect(),
        tlinks: doc.tlinks().to_vec(),
    };
    serde_json::to_string(&wire).expect("documents always serialize")
}

/// Whole corpus, one line per document, newline-terminated.
pub fn write_json_corpus(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serialize_json(d));
        out.push('\n');
    }
    out
}
