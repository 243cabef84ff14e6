//! Fitting a relative time-line to a TLink set.
//!
//! The only free variables are a start and a raw duration per entity and the
//! DCT duration; the DCT start is pinned at [`DCT_START`]. Adam minimizes the
//! configured loss until it is zero or the epoch budget runs out. A fit that
//! gets within `eps_conv` of zero counts as converged; a short polishing
//! phase after that point tries to remove the last residual so that every
//! link is satisfied exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autograd::{AdamConfig, ParamStore, Scalar, Tape};
use crate::corpus::{Document, TLink};
use crate::exec::Exec;
use crate::pointalg::{is_consistent, TLinkType};
use crate::timeline::{links_loss, relation_loss, Interval, LossConfig, RelativeTimeline, DCT_START};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub loss: LossConfig,
    pub max_epochs: usize,
    pub eps_conv: f64,
    pub adam: AdamConfig,
    /// Initial starts are uniform in `[0, init_spread * n]`, `n` the number
    /// of entities; initial durations are `init_duration`.
    pub init_spread: f64,
    pub init_duration: f64,
    /// Extra steps allowed after the loss first drops to `eps_conv`, spent
    /// driving the residual to exactly zero.
    pub polish_epochs: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            loss: LossConfig::default(),
            max_epochs: 10_000,
            eps_conv: 1e-6,
            adam: AdamConfig::default(),
            init_spread: 0.1,
            init_duration: 1.0,
            polish_epochs: 500,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.loss.validate()?;
        self.adam.validate()?;
        if self.max_epochs == 0 {
            return Err("max_epochs must be at least 1".into());
        }
        if !(self.eps_conv >= 0.0) {
            return Err(format!("eps_conv must be non-negative, got {}", self.eps_conv));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("document {doc:?}: TLink endpoint {id:?} is not an entity")]
    UnknownEntity { doc: String, id: String },
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub timeline: RelativeTimeline,
    /// Configured loss at the returned time-line.
    pub loss: f64,
    /// Share of input TLinks with zero relation loss.
    pub satisfied: f64,
    /// Adam steps taken.
    pub epochs: usize,
    pub converged: bool,
    /// Whether the input TLinks are consistent under point closure.
    pub consistent: bool,
}

/// Seed for document `index` of a corpus fit with `seed`.
pub fn doc_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn indexed(doc: &Document, tlinks: &[TLink]) -> Result<Vec<(usize, usize, TLinkType)>, FitError> {
    let idx = |id: &str| {
        doc.entity_index(id).ok_or_else(|| FitError::UnknownEntity { doc: doc.id().to_string(), id: id.to_string() })
    };
    tlinks.iter().map(|l| Ok((idx(&l.source)?, idx(&l.target)?, l.relation))).collect()
}

/// Fits a time-line over all entities of `doc` to `tlinks`.
pub fn fit(doc: &Document, tlinks: &[TLink], cfg: &FitConfig, seed: u64) -> Result<FitResult, FitError> {
    let links = indexed(doc, tlinks)?;
    let n = doc.entities().len();
    let dct = doc.dct_index();
    // slot of each non-DCT entity in the start/duration tensors
    let slots: Vec<Option<usize>> = {
        let mut next = 0;
        (0..n)
            .map(|i| {
                (i != dct).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let m = n - 1;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new(seed);
    let hi = cfg.init_spread * n as f64;
    let starts = (0..m).map(|_| if hi > 0.0 { rng.gen_range(0.0..hi) } else { 0.0 }).collect();
    let start_id = store.add("start", vec![m], starts);
    let dur_id = store.add("duration", vec![m], vec![cfg.init_duration; m]);
    let dct_id = store.add("dct_duration", vec![1], vec![1.0]);
    let d_min = cfg.loss.d_min;

    let mut tape = Tape::new();
    let mut best = (f64::INFINITY, store.clone());
    let mut epochs = 0;
    let mut converged_at = None;
    if !links.is_empty() {
        loop {
            tape.clear();
            let grads = {
                let s = tape.param(&store, start_id);
                let d = tape.param(&store, dur_id);
                let dd = tape.param(&store, dct_id);
                let intervals: Vec<Interval<_>> = slots
                    .iter()
                    .map(|slot| match *slot {
                        Some(k) => Interval::from_start_duration(s.index(k), d.index(k), d_min),
                        None => Interval::from_start_duration(tape.scalar(DCT_START), dd, d_min),
                    })
                    .collect();
                let root = links_loss(&links, &intervals, &cfg.loss, tape.scalar(0.0));
                let loss = root.value();
                if loss < best.0 {
                    best = (loss, store.clone());
                }
                if loss <= cfg.eps_conv && converged_at.is_none() {
                    converged_at = Some(epochs);
                }
                let polished = converged_at.is_some_and(|at| loss == 0.0 || epochs >= at + cfg.polish_epochs);
                if polished || epochs >= cfg.max_epochs {
                    None
                } else {
                    Some(tape.backward(root).param_grads(&store))
                }
            };
            match grads {
                Some(g) => {
                    store.adam_step(&g, &cfg.adam);
                    // Below d_min a raw duration has no gradient and would stay
                    // stuck at the clamp. Lifting it back to d_min leaves every
                    // end point unchanged but keeps it trainable.
                    for id in [dur_id, dct_id] {
                        for v in store.data_mut(id) {
                            *v = v.max(d_min);
                        }
                    }
                    epochs += 1;
                }
                None => break,
            }
        }
    } else {
        best.0 = 0.0;
    }

    let (loss, store) = best;
    let converged = loss <= cfg.eps_conv;
    let (s, d, dd) = (&store.tensor(start_id).data, &store.tensor(dur_id).data, store.tensor(dct_id).data[0]);
    let starts = slots.iter().map(|slot| slot.map_or(DCT_START, |k| s[k])).collect();
    let durations = slots.iter().map(|slot| slot.map_or(dd, |k| d[k])).collect();
    let timeline = RelativeTimeline::for_document(doc, starts, durations, d_min);

    let satisfied = if links.is_empty() {
        1.0
    } else {
        let ok = links
            .iter()
            .filter(|&&(a, b, r)| relation_loss(r, &timeline.interval(a), &timeline.interval(b), cfg.loss.m_tau) == 0.0)
            .count();
        ok as f64 / links.len() as f64
    };
    Ok(FitResult { timeline, loss, satisfied, epochs, converged, consistent: is_consistent(tlinks) })
}

/// Per-document outcome of a corpus fit.
#[derive(Debug, Clone)]
pub struct DocFit {
    pub doc: String,
    pub result: Result<FitResult, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitSummary {
    pub docs: usize,
    pub failed: usize,
    pub converged: usize,
    pub mean_loss: f64,
    pub mean_satisfied: f64,
    /// Documents with inconsistent input or a positive final loss.
    pub flagged: Vec<String>,
}

/// Fits every document to its own TLinks, in parallel when `exec` allows.
/// Output order follows the input; per-document seeds come from
/// [`doc_seed`], so results do not depend on scheduling.
pub fn fit_corpus(docs: &[Document], cfg: &FitConfig, seed: u64, exec: Exec) -> (Vec<DocFit>, FitSummary) {
    let fits = exec.map(docs, |i, doc| DocFit {
        doc: doc.id().to_string(),
        result: fit(doc, doc.tlinks(), cfg, doc_seed(seed, i)).map_err(|e| e.to_string()),
    });
    let summary = summarize(&fits, cfg.eps_conv);
    (fits, summary)
}

pub fn summarize(fits: &[DocFit], eps_conv: f64) -> FitSummary {
    let ok: Vec<&FitResult> = fits.iter().filter_map(|f| f.result.as_ref().ok()).collect();
    let mean = |v: Vec<f64>| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    FitSummary {
        docs: fits.len(),
        failed: fits.len() - ok.len(),
        converged: ok.iter().filter(|r| r.converged).count(),
        mean_loss: mean(ok.iter().map(|r| r.loss).collect()),
        mean_satisfied: mean(ok.iter().map(|r| r.satisfied).collect()),
        flagged: fits
            .iter()
            .filter(|f| match &f.result {
                Ok(r) => !r.consistent || r.loss > eps_conv,
                Err(_) => true,
            })
            .map(|f| f.doc.clone())
            .collect(),
    }
}
