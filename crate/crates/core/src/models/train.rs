use std::collections::HashMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dropout, Model, ModelDims, ModelError, ModelKind, Vocab};
use crate::autograd::{AdamConfig, Scalar, Tape};
use crate::corpus::Document;
use crate::eval::{assign_labels, corpus_awareness};
use crate::exec::Exec;
use crate::timeline::{link_loss, LossConfig};

/// Early-stopping criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monitor {
    #[default]
    DevLoss,
    DevF1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// TLinks per mini-batch.
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub dropout: f64,
    pub loss: LossConfig,
    /// Share of documents held out for early stopping.
    pub dev_fraction: f64,
    pub seed: u64,
    pub adam: AdamConfig,
    pub dims: ModelDims,
    pub monitor: Monitor,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            patience: 100,
            max_epochs: 1000,
            dropout: 0.1,
            loss: LossConfig::default(),
            dev_fraction: 0.15,
            seed: 1,
            adam: AdamConfig::default(),
            dims: ModelDims::default(),
            monitor: Monitor::DevLoss,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |m: String| Err(ModelError::Config(m));
        self.loss.validate().map_err(ModelError::Config)?;
        self.adam.validate().map_err(ModelError::Config)?;
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be at least 1".into());
        }
        if self.patience >= self.max_epochs {
            return fail(format!("patience ({}) must be below max_epochs ({})", self.patience, self.max_epochs));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if !(0.0..1.0).contains(&self.dev_fraction) {
            return fail(format!("dev_fraction must be in [0, 1), got {}", self.dev_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRow {
    pub epoch: usize,
    /// Mean per-TLink loss over the epoch's mini-batches.
    pub train_loss: f64,
    pub dev_loss: f64,
    pub dev_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLog {
    pub rows: Vec<EpochRow>,
    /// Epoch of the returned parameters (0 = initialization).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,dev_loss,dev_f1\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.9},{:.9},{:.6}", r.epoch, r.train_loss, r.dev_loss, r.dev_f1);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub log: TrainLog,
}

/// Document-level split: a seeded shuffle, the first `fraction` of it (at
/// least one document when `fraction > 0`) held out. Both parts keep corpus
/// order.
pub fn split_dev(docs: &[Document], fraction: f64, seed: u64) -> (Vec<Document>, Vec<Document>) {
    let n = docs.len();
    let k = if fraction > 0.0 { ((fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1)) } else { 0 };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_DE5F));
    let mut held = vec![false; n];
    for &i in &order[..k] {
        held[i] = true;
    }
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (d, h) in docs.iter().zip(held) {
        if h { &mut dev } else { &mut train }.push(d.clone());
    }
    (train, dev)
}

/// Mean per-TLink loss (no dropout) and temporal-awareness F1 of `model`
/// on `docs`.
pub fn evaluate(model: &Model, docs: &[Document], loss: &LossConfig, exec: Exec) -> (f64, f64) {
    let per_doc = exec.map(docs, |_, d| {
        let tape = Tape::new();
        let b = model.bind(&tape, model.store());
        let iv = model.encode(&tape, &b, d, None);
        let total: f64 = d.indexed_tlinks().iter().map(|&(x, y, r)| link_loss(r, &iv[x], &iv[y], loss).value()).sum();
        let tl = model.predict(d);
        let system = assign_labels(&tl, d.tlinks(), loss);
        (total, d.tlinks().len(), (d.id().to_string(), d.tlinks().to_vec(), system))
    });
    let links: usize = per_doc.iter().map(|p| p.1).sum();
    let loss_sum: f64 = per_doc.iter().map(|p| p.0).sum();
    let items: Vec<_> = per_doc.into_iter().map(|p| p.2).collect();
    let f1 = corpus_awareness(&items, exec).f1;
    (if links == 0 { 0.0 } else { loss_sum / links as f64 }, f1)
}

/// Trains on a seeded document split of `docs` (see [`split_dev`]).
pub fn train(
    kind: ModelKind,
    docs: &[Document],
    cfg: &TrainConfig,
    embeddings: Option<&HashMap<String, Vec<f64>>>,
) -> Result<Trained, ModelError> {
    cfg.validate()?;
    if cfg.dev_fraction == 0.0 || docs.len() < 2 {
        return Err(ModelError::NoDevLinks);
    }
    let (tr, dev) = split_dev(docs, cfg.dev_fraction, cfg.seed);
    train_with_dev(kind, &tr, &dev, cfg, embeddings)
}

/// Mini-batch training with early stopping on `dev`; returns the best
/// parameters seen. The vocabulary comes from `train_docs` only.
pub fn train_with_dev(
    kind: ModelKind,
    train_docs: &[Document],
    dev: &[Document],
    cfg: &TrainConfig,
    embeddings: Option<&HashMap<String, Vec<f64>>>,
) -> Result<Trained, ModelError> {
    cfg.validate()?;
    if train_docs.iter().all(|d| d.tlinks().is_empty()) {
        return Err(ModelError::Config("training documents have no TLinks".into()));
    }
    if dev.iter().all(|d| d.tlinks().is_empty()) {
        return Err(ModelError::NoDevLinks);
    }
    let mut model = Model::new(kind, Vocab::build(train_docs), cfg.dims, cfg.loss.d_min, cfg.seed, embeddings)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x7EA1));
    let mut dropout = Dropout { rate: cfg.dropout, rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0xD209)) };
    let exec = Exec::Sequential;

    let indexed: Vec<_> = train_docs.iter().map(Document::indexed_tlinks).collect();
    let total_links: usize = indexed.iter().map(Vec::len).sum();
    let mut order: Vec<usize> = (0..train_docs.len()).collect();
    let mut tape = Tape::new();

    let (dev_loss, dev_f1) = evaluate(&model, dev, &cfg.loss, exec);
    let score = |loss: f64, f1: f64| match cfg.monitor {
        Monitor::DevLoss => loss,
        Monitor::DevF1 => -f1,
    };
    let mut best = (score(dev_loss, dev_f1), model.store().clone(), 0);
    let mut rows = Vec::new();
    let mut stale = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        // (doc, link) pairs in shuffled document order
        let links: Vec<(usize, usize)> = order.iter().flat_map(|&d| (0..indexed[d].len()).map(move |l| (d, l))).collect();
        let mut epoch_loss = 0.0;
        for batch in links.chunks(cfg.batch_size) {
            tape.clear();
            let grads = {
                let b = model.bind(&tape, model.store());
                let mut terms = Vec::with_capacity(batch.len());
                let mut i = 0;
                while i < batch.len() {
                    let d = batch[i].0;
                    let iv = model.encode(&tape, &b, &train_docs[d], Some(&mut dropout));
                    while i < batch.len() && batch[i].0 == d {
                        let (x, y, r) = indexed[d][batch[i].1];
                        terms.push(link_loss(r, &iv[x], &iv[y], &cfg.loss));
                        i += 1;
                    }
                }
                let root = crate::autograd::sum_all(tape.scalar(0.0), terms).scale(1.0 / batch.len() as f64);
                epoch_loss += root.item() * batch.len() as f64;
                tape.backward(root).param_grads(model.store())
            };
            model.store_mut().adam_step(&grads, &cfg.adam);
            model.project();
        }

        let (dev_loss, dev_f1) = evaluate(&model, dev, &cfg.loss, exec);
        rows.push(EpochRow { epoch, train_loss: epoch_loss / total_links as f64, dev_loss, dev_f1 });
        let s = score(dev_loss, dev_f1);
        if s < best.0 {
            best = (s, model.store().clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                stopped_early = epoch < cfg.max_epochs;
                break;
            }
        }
    }

    *model.store_mut() = best.1;
    Ok(Trained { model, log: TrainLog { rows, best_epoch: best.2, stopped_early } })
}
