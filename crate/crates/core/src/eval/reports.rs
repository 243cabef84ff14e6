use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::corpus::{Document, EntityKind};
use crate::timeline::{tlink_loss, LossConfig, RelativeTimeline};

/// Surface forms with the most extreme mean durations and starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremesReport {
    pub shortest: Vec<(String, f64)>,
    pub longest: Vec<(String, f64)>,
    pub earliest: Vec<(String, f64)>,
    pub latest: Vec<(String, f64)>,
}

fn ranked(means: &[(String, f64)], k: usize, descending: bool) -> Vec<(String, f64)> {
    let mut v = means.to_vec();
    v.sort_by(|a, b| {
        let ord = if descending { b.1.total_cmp(&a.1) } else { a.1.total_cmp(&b.1) };
        ord.then_with(|| a.0.cmp(&b.0))
    });
    v.truncate(k);
    v
}

/// Means over every mention of a surface form (the DCT is left out), then
/// the `k` extremes of each list. Ties go to the lexicographically smaller
/// surface.
pub fn extremes_report(items: &[(&Document, &RelativeTimeline)], k: usize) -> ExtremesReport {
    let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for (doc, tl) in items {
        for e in doc.entities() {
            if e.kind == EntityKind::Dct {
                continue;
            }
            let Some(i) = tl.index_of(&e.id) else { continue };
            let slot = acc.entry(doc.surface(e)).or_insert((0.0, 0.0, 0));
            slot.0 += tl.start(i);
            slot.1 += tl.duration(i);
            slot.2 += 1;
        }
    }
    let starts: Vec<(String, f64)> = acc.iter().map(|(s, &(a, _, n))| (s.clone(), a / n as f64)).collect();
    let durations: Vec<(String, f64)> = acc.iter().map(|(s, &(_, d, n))| (s.clone(), d / n as f64)).collect();
    ExtremesReport {
        shortest: ranked(&durations, k, false),
        longest: ranked(&durations, k, true),
        earliest: ranked(&starts, k, false),
        latest: ranked(&starts, k, true),
    }
}

impl ExtremesReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (title, list) in
            [("shortest", &self.shortest), ("longest", &self.longest), ("earliest", &self.earliest), ("latest", &self.latest)]
        {
            let _ = writeln!(out, "{title}");
            for (s, v) in list {
                let _ = writeln!(out, "  {v:>10.3}  {s}");
            }
        }
        out
    }
}

/// Mean token distance between the arguments of satisfied and violated
/// TLinks. A mean is `None` when its group is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub satisfied: usize,
    pub violated: usize,
    pub mean_satisfied: Option<f64>,
    pub mean_violated: Option<f64>,
}

/// Distance is measured between the last tokens of both mentions; TLinks
/// touching the DCT have no span and are skipped. A TLink is satisfied when
/// its time-line loss is exactly zero.
pub fn distance_report(items: &[(&Document, &RelativeTimeline)], cfg: &LossConfig) -> DistanceReport {
    let (mut sat, mut vio) = (Vec::new(), Vec::new());
    for (doc, tl) in items {
        for l in doc.tlinks() {
            let heads = doc.entity(&l.source).and_then(|e| e.head()).zip(doc.entity(&l.target).and_then(|e| e.head()));
            let Some((a, b)) = heads else { continue };
            let d = a.abs_diff(b) as f64;
            if tlink_loss(l, tl, cfg) == 0.0 {
                sat.push(d);
            } else {
                vio.push(d);
            }
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    DistanceReport { satisfied: sat.len(), violated: vio.len(), mean_satisfied: mean(&sat), mean_violated: mean(&vio) }
}

impl DistanceReport {
    pub fn to_table(&self) -> String {
        let show = |m: Option<f64>| m.map_or("-".to_string(), |v| format!("{v:.3}"));
        format!(
            "{:<10} {:>6} {:>10}\n{:<10} {:>6} {:>10}\n{:<10} {:>6} {:>10}\n",
            "group",
            "links",
            "distance",
            "satisfied",
            self.satisfied,
            show(self.mean_satisfied),
            "violated",
            self.violated,
            show(self.mean_violated)
        )
    }
}
