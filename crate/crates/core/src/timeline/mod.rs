//! Relative time-lines, the losses that tie them to TLinks, and the reverse
//! direction: reading a TLink type off a time-line.
//!
//! An entity's end point is `start + max(duration, d_min)`, so every realized
//! interval has positive length. The DCT starts at [`DCT_START`].

mod loss;
mod render;

pub use loss::{
    ce_from_scores, derive_from_intervals, end_point, link_loss, links_loss, point_loss, rank_from_scores,
    relation_loss, relation_losses, Interval,
};
pub use render::{render, RenderFormat};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::corpus::{Document, TLink};
use crate::pointalg::TLinkType;

/// Start coordinate of the document-creation time.
pub const DCT_START: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LossKind {
    /// Sum of relation losses of the annotated links.
    #[default]
    #[serde(rename = "tau")]
    Tau,
    /// Cross-entropy over the eleven relation scores.
    #[serde(rename = "ce")]
    TauCe,
    /// Margin ranking of the gold score against the other ten.
    #[serde(rename = "hinge")]
    TauH,
    /// Unweighted sum of the three.
    #[serde(rename = "star")]
    Star,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Tau, LossKind::TauCe, LossKind::TauH, LossKind::Star];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Tau => "tau",
            LossKind::TauCe => "ce",
            LossKind::TauH => "hinge",
            LossKind::Star => "star",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown loss {s:?}, expected one of tau, ce, hinge, star"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    /// Margin between ordered points, and tolerance of equal ones.
    pub m_tau: f64,
    /// Score margin of the ranking loss.
    pub m_h: f64,
    pub d_min: f64,
    pub kind: LossKind,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { m_tau: 0.025, m_h: 0.1, d_min: 0.1, kind: LossKind::Tau }
    }
}

impl LossConfig {
    pub fn with_kind(kind: LossKind) -> Self {
        LossConfig { kind, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.m_tau >= 0.0) || !(self.m_h >= 0.0) {
            return Err(format!("margins must be non-negative (m_tau {}, m_h {})", self.m_tau, self.m_h));
        }
        if !(self.d_min > 0.0) {
            return Err(format!("d_min must be positive, got {}", self.d_min));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Mismatch(String),
}

/// Start and raw (unclamped) duration per entity.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeTimeline {
    ids: Vec<String>,
    starts: Vec<f64>,
    durations: Vec<f64>,
    d_min: f64,
    index: HashMap<String, usize>,
}

impl RelativeTimeline {
    /// # Panics
    /// On length mismatch, duplicate ids or `d_min <= 0`.
    pub fn new(ids: Vec<String>, starts: Vec<f64>, durations: Vec<f64>, d_min: f64) -> Self {
        assert!(ids.len() == starts.len() && ids.len() == durations.len(), "timeline columns differ in length");
        assert!(d_min > 0.0, "d_min must be positive");
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            assert!(index.insert(id.clone(), i).is_none(), "duplicate timeline entity {id:?}");
        }
        RelativeTimeline { ids, starts, durations, d_min, index }
    }

    /// A time-line over the entities of `doc`, in document order.
    pub fn for_document(doc: &Document, starts: Vec<f64>, durations: Vec<f64>, d_min: f64) -> Self {
        let ids = doc.entities().iter().map(|e| e.id.clone()).collect();
        RelativeTimeline::new(ids, starts, durations, d_min)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn start(&self, i: usize) -> f64 {
        self.starts[i]
    }

    pub fn duration(&self, i: usize) -> f64 {
        self.durations[i]
    }

    pub fn end(&self, i: usize) -> f64 {
        end_point(self.starts[i], self.durations[i], self.d_min)
    }

    pub fn interval(&self, i: usize) -> Interval<f64> {
        Interval { start: self.starts[i], end: self.end(i) }
    }

    /// Interval of an entity by id.
    ///
    /// # Panics
    /// If the id is not on the time-line.
    pub fn interval_of(&self, id: &str) -> Interval<f64> {
        let i = self.index_of(id).unwrap_or_else(|| panic!("entity {id:?} not on the time-line"));
        self.interval(i)
    }

    /// Errors with the first entity of `doc` missing from the time-line.
    pub fn check_covers(&self, doc: &Document) -> Result<(), TimelineError> {
        match doc.entities().iter().find(|e| !self.index.contains_key(&e.id)) {
            None => Ok(()),
            Some(e) => Err(TimelineError::Mismatch(format!(
                "document {:?}: entity {:?} has no time-line entry",
                doc.id(),
                e.id
            ))),
        }
    }

    /// `{"id": {"start": s, "end": e}, ...}` in entity order, six decimals.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        for i in 0..self.len() {
            if i > 0 {
                out.push(',');
            }
            let id = serde_json::to_string(&self.ids[i]).expect("strings serialize");
            out.push_str(&format!("{id}:{{\"start\":{:.6},\"end\":{:.6}}}", self.starts[i], self.end(i)));
        }
        out.push('}');
        out
    }

    /// Reads [`Self::to_json`] output back; durations become `end - start`.
    pub fn from_json(text: &str, d_min: f64) -> Result<Self, TimelineError> {
        let raw: RawTimeline =
            serde_json::from_str(text).map_err(|e| TimelineError::Parse { line: e.line(), message: e.to_string() })?;
        raw.into_timeline(d_min).map_err(|message| TimelineError::Parse { line: 1, message })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    start: f64,
    end: f64,
}

/// An id-keyed JSON object read in file order.
struct RawTimeline(Vec<(String, RawPoint)>);

impl<'de> Deserialize<'de> for RawTimeline {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawTimeline;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping entity ids to {start, end}")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawTimeline, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, RawPoint>()? {
                    out.push(entry);
                }
                Ok(RawTimeline(out))
            }
        }
        d.deserialize_map(V)
    }
}

impl RawTimeline {
    fn into_timeline(self, d_min: f64) -> Result<RelativeTimeline, String> {
        let mut seen = HashMap::new();
        for (i, (id, _)) in self.0.iter().enumerate() {
            if seen.insert(id.clone(), i).is_some() {
                return Err(format!("duplicate entity {id:?}"));
            }
        }
        let ids = self.0.iter().map(|(id, _)| id.clone()).collect();
        let starts = self.0.iter().map(|(_, p)| p.start).collect();
        let durations = self.0.iter().map(|(_, p)| p.end - p.start).collect();
        Ok(RelativeTimeline::new(ids, starts, durations, d_min))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TimelineLine {
    doc: String,
    timeline: RawTimeline,
}

/// JSON-lines of `{"doc": id, "timeline": {...}}`.
pub fn write_timelines<'a>(items: impl IntoIterator<Item = (&'a str, &'a RelativeTimeline)>) -> String {
    let mut out = String::new();
    for (doc, tl) in items {
        let id = serde_json::to_string(doc).expect("strings serialize");
        out.push_str(&format!("{{\"doc\":{id},\"timeline\":{}}}\n", tl.to_json()));
    }
    out
}

pub fn parse_timelines(text: &str, d_min: f64) -> Result<Vec<(String, RelativeTimeline)>, TimelineError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TimelineLine =
            serde_json::from_str(line).map_err(|e| TimelineError::Parse { line: i + 1, message: e.to_string() })?;
        let tl = parsed.timeline.into_timeline(d_min).map_err(|message| TimelineError::Parse { line: i + 1, message })?;
        out.push((parsed.doc, tl));
    }
    Ok(out)
}

fn intervals_of(link: &TLink, tl: &RelativeTimeline) -> (Interval<f64>, Interval<f64>) {
    (tl.interval_of(&link.source), tl.interval_of(&link.target))
}

/// Relation loss of one TLink on a time-line.
pub fn tlink_loss(link: &TLink, tl: &RelativeTimeline, cfg: &LossConfig) -> f64 {
    let (x, y) = intervals_of(link, tl);
    relation_loss(link.relation, &x, &y, cfg.m_tau)
}

/// Score of `x r y`: the negated relation loss, at most 0.
pub fn score(r: TLinkType, x: &str, y: &str, tl: &RelativeTimeline, cfg: &LossConfig) -> f64 {
    -relation_loss(r, &tl.interval_of(x), &tl.interval_of(y), cfg.m_tau)
}

/// Loss of a TLink set under the given kind.
pub fn loss_for_links(links: &[TLink], tl: &RelativeTimeline, kind: LossKind, cfg: &LossConfig) -> f64 {
    let cfg = LossConfig { kind, ..*cfg };
    links
        .iter()
        .map(|l| {
            let (x, y) = intervals_of(l, tl);
            link_loss(l.relation, &x, &y, &cfg)
        })
        .sum()
}

pub fn timeline_loss(doc: &Document, tl: &RelativeTimeline, cfg: &LossConfig) -> f64 {
    loss_for_links(doc.tlinks(), tl, LossKind::Tau, cfg)
}

pub fn ce_loss(doc: &Document, tl: &RelativeTimeline, cfg: &LossConfig) -> f64 {
    loss_for_links(doc.tlinks(), tl, LossKind::TauCe, cfg)
}

pub fn rank_loss(doc: &Document, tl: &RelativeTimeline, cfg: &LossConfig) -> f64 {
    loss_for_links(doc.tlinks(), tl, LossKind::TauH, cfg)
}

pub fn combined_loss(doc: &Document, tl: &RelativeTimeline, cfg: &LossConfig) -> f64 {
    loss_for_links(doc.tlinks(), tl, LossKind::Star, cfg)
}

/// Relation type with the lowest relation loss between `x` and `y`.
pub fn derive_tlink(x: &str, y: &str, tl: &RelativeTimeline, cfg: &LossConfig) -> TLinkType {
    derive_from_intervals(&tl.interval_of(x), &tl.interval_of(y), cfg.m_tau)
}
