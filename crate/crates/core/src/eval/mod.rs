//! Scoring time-lines against gold TLinks.
//!
//! Predicted time-lines are first turned back into TLinks ([`assign_labels`])
//! and then compared to the gold set with the temporal-awareness metric:
//! both sides are reduced to a non-redundant core, and a relation counts as
//! correct when the closure of the other side entails it.

mod confusion;
mod reports;

pub use confusion::{confusion, ConfusionMatrix};
pub use reports::{distance_report, extremes_report, DistanceReport, ExtremesReport};

use std::collections::BTreeSet;

use serde::Serialize;

use crate::corpus::TLink;
use crate::exec::Exec;
use crate::pointalg::ClosureMatrix;
use crate::timeline::{derive_tlink, LossConfig, RelativeTimeline};

/// The relation the time-line realizes for every gold pair.
pub fn assign_labels(tl: &RelativeTimeline, gold: &[TLink], cfg: &LossConfig) -> Vec<TLink> {
    gold.iter()
        .map(|l| TLink::new(l.source.clone(), l.target.clone(), derive_tlink(&l.source, &l.target, tl, cfg)))
        .collect()
}

fn endpoints(links: &[&TLink]) -> BTreeSet<String> {
    links.iter().flat_map(|l| [l.source.clone(), l.target.clone()]).collect()
}

fn closure_of(links: &[&TLink]) -> ClosureMatrix<String> {
    ClosureMatrix::from_tlinks(std::iter::empty(), links.iter().copied())
}

/// Greedy transitive reduction: scanning links by relation type in
/// canonical order (input order within a type), drop each link that the
/// closure of the links still kept, minus itself, entails.
pub fn reduce(links: &[TLink]) -> Vec<TLink> {
    let mut order: Vec<usize> = (0..links.len()).collect();
    order.sort_by_key(|&i| (links[i].relation.ordinal(), i));
    let mut kept = vec![true; links.len()];
    for &i in &order {
        let rest: Vec<&TLink> = (0..links.len()).filter(|&j| j != i && kept[j]).map(|j| &links[j]).collect();
        let l = &links[i];
        if closure_of(&rest).entails_tlink(l.relation, &l.source, &l.target) {
            kept[i] = false;
        }
    }
    links.iter().zip(kept).filter(|(_, k)| *k).map(|(l, _)| l.clone()).collect()
}

/// Awareness counts for one document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocAwareness {
    pub doc: String,
    pub system_correct: usize,
    pub system_total: usize,
    pub reference_correct: usize,
    pub reference_total: usize,
    pub system_consistent: bool,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl DocAwareness {
    /// Precision; an empty reduced system set counts as precise.
    pub fn precision(&self) -> f64 {
        ratio(self.system_correct, self.system_total)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.reference_correct, self.reference_total)
    }

    pub fn f1(&self) -> f64 {
        harmonic(self.precision(), self.recall())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AwarenessReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub system_correct: usize,
    pub system_total: usize,
    pub reference_correct: usize,
    pub reference_total: usize,
    /// Documents whose system TLinks are inconsistent.
    pub inconsistent_docs: Vec<String>,
    pub per_doc: Vec<DocAwareness>,
}

/// Awareness counts of `system` against `reference` for one document.
pub fn score_document(doc: &str, reference: &[TLink], system: &[TLink]) -> DocAwareness {
    let ref_all: Vec<&TLink> = reference.iter().collect();
    let sys_all: Vec<&TLink> = system.iter().collect();
    let ref_closure = closure_of(&ref_all);
    let sys_closure = closure_of(&sys_all);
    let ref_core = reduce(reference);
    let sys_core = reduce(system);
    let hits = |core: &[TLink], closure: &ClosureMatrix<String>| {
        core.iter().filter(|l| closure.entails_tlink(l.relation, &l.source, &l.target)).count()
    };
    DocAwareness {
        doc: doc.to_string(),
        system_correct: hits(&sys_core, &ref_closure),
        system_total: sys_core.len(),
        reference_correct: hits(&ref_core, &sys_closure),
        reference_total: ref_core.len(),
        system_consistent: sys_closure.is_consistent(),
    }
}

/// Micro-averaged report over documents.
pub fn aggregate(per_doc: Vec<DocAwareness>) -> AwarenessReport {
    let sum = |f: fn(&DocAwareness) -> usize| per_doc.iter().map(f).sum::<usize>();
    let (sc, st) = (sum(|d| d.system_correct), sum(|d| d.system_total));
    let (rc, rt) = (sum(|d| d.reference_correct), sum(|d| d.reference_total));
    let (precision, recall) = (ratio(sc, st), ratio(rc, rt));
    AwarenessReport {
        precision,
        recall,
        f1: harmonic(precision, recall),
        system_correct: sc,
        system_total: st,
        reference_correct: rc,
        reference_total: rt,
        inconsistent_docs: per_doc.iter().filter(|d| !d.system_consistent).map(|d| d.doc.clone()).collect(),
        per_doc,
    }
}

/// Temporal awareness of one system TLink set against a reference set.
pub fn temporal_awareness(reference: &[TLink], system: &[TLink]) -> AwarenessReport {
    aggregate(vec![score_document("", reference, system)])
}

/// Document-level `(id, reference, system)` triples scored and
/// micro-averaged; per-document rows keep input order.
pub fn corpus_awareness(items: &[(String, Vec<TLink>, Vec<TLink>)], exec: Exec) -> AwarenessReport {
    aggregate(exec.map(items, |_, (doc, r, s)| score_document(doc, r, s)))
}

/// Entities mentioned by a link set, sorted.
pub fn link_entities(links: &[TLink]) -> BTreeSet<String> {
    endpoints(&links.iter().collect::<Vec<_>>())
}
