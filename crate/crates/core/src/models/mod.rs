//! Direct time-line prediction from text.
//!
//! Both models read a word representation per token (word embedding, POS
//! embedding and a Boolean block of entity attributes) and place every
//! entity by two scalar projections, one for its start and one for its
//! duration. S-TLM projects the representation of the entity's last token
//! directly, so each entity is placed independently of its context. C-TLM
//! first runs two separate bidirectional recurrent encoders over the whole
//! text, one feeding starts and one feeding durations, and projects their
//! states at the entity's last token. The DCT always starts at 0 and has a
//! single learned duration.

mod grid;
mod train;
mod vocab;

pub use grid::{grid_search, Grid, GridPoint, GridResult, GridRow};
pub use train::{evaluate, train, train_with_dev, split_dev, EpochRow, Monitor, TrainConfig, TrainLog, Trained};
pub use vocab::{covering_entities, Vocab, UNK};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autograd::{Checkpoint, ParamId, ParamStore, StoreError, Tape, Var};
use crate::corpus::{Document, EntityKind};
use crate::exec::Exec;
use crate::timeline::{Interval, RelativeTimeline, DCT_START};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "s-tlm")]
    STlm,
    #[serde(rename = "c-tlm")]
    CTlm,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::STlm => "s-tlm",
            ModelKind::CTlm => "c-tlm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "s-tlm" | "stlm" => Ok(ModelKind::STlm),
            "c-tlm" | "ctlm" => Ok(ModelKind::CTlm),
            _ => Err(format!("unknown model {s:?} (expected s-tlm or c-tlm)")),
        }
    }
}

/// Layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelDims {
    pub word: usize,
    pub pos: usize,
    /// Recurrent units per direction (C-TLM only).
    pub hidden: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims { word: 50, pos: 10, hidden: 25 }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no development TLinks: use a dev fraction > 0 and a corpus whose held-out documents have TLinks")]
    NoDevLinks,
    #[error("checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("checkpoint json: {0}")]
    Json(#[from] serde_json::Error),
}

const EMB_BOUND: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
struct Cell {
    gate_w: ParamId,
    gate_b: ParamId,
    cand_w: ParamId,
    cand_b: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct Head {
    w: ParamId,
    b: ParamId,
}

#[derive(Debug, Clone)]
struct Ids {
    word: ParamId,
    pos: ParamId,
    dct: ParamId,
    /// Start and duration projections.
    heads: [Head; 2],
    /// `[start, duration] x [forward, backward]` (C-TLM only).
    cells: Option<[[Cell; 2]; 2]>,
}

/// A trained or freshly initialized S-TLM / C-TLM.
#[derive(Debug, Clone)]
pub struct Model {
    kind: ModelKind,
    dims: ModelDims,
    d_min: f64,
    vocab: Vocab,
    store: ParamStore,
    ids: Ids,
}

fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Inverted dropout on word representations.
pub(crate) struct Dropout {
    pub rate: f64,
    pub rng: ChaCha8Rng,
}

impl Dropout {
    fn mask(&mut self, n: usize) -> Vec<f64> {
        let keep = 1.0 / (1.0 - self.rate);
        (0..n).map(|_| if self.rng.gen::<f64>() < self.rate { 0.0 } else { keep }).collect()
    }
}

/// Parameter leaves of one model on one tape.
pub(crate) struct Bound<'t> {
    word: Var<'t>,
    pos: Var<'t>,
    dct: Var<'t>,
    heads: [(Var<'t>, Var<'t>); 2],
    cells: Option<[[[Var<'t>; 4]; 2]; 2]>,
}

impl Model {
    /// Registers all parameters. Word rows found in `embeddings` are copied
    /// from it; everything else is random (embeddings uniform in ±0.05,
    /// weights Glorot-uniform, biases 0 except the duration bias and the DCT
    /// duration, which start at 1).
    pub fn new(
        kind: ModelKind,
        vocab: Vocab,
        dims: ModelDims,
        d_min: f64,
        seed: u64,
        embeddings: Option<&HashMap<String, Vec<f64>>>,
    ) -> Result<Model, ModelError> {
        if dims.word == 0 || dims.pos == 0 || (kind == ModelKind::CTlm && dims.hidden == 0) {
            return Err(ModelError::Config(format!("layer sizes must be positive, got {dims:?}")));
        }
        if !(d_min > 0.0) {
            return Err(ModelError::Config(format!("d_min must be positive, got {d_min}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new(seed);
        let (v, p) = (vocab.words.len(), vocab.pos.len());
        let word = store.add_uniform("word_emb", vec![v, dims.word], EMB_BOUND, &mut rng);
        if let Some(emb) = embeddings {
            let data = store.data_mut(word);
            for (i, w) in vocab.words.iter().enumerate().skip(1) {
                if let Some(vec) = emb.get(w) {
                    if vec.len() != dims.word {
                        return Err(ModelError::Config(format!(
                            "embedding for {w:?} has {} values, word dimension is {}",
                            vec.len(),
                            dims.word
                        )));
                    }
                    data[i * dims.word..(i + 1) * dims.word].copy_from_slice(vec);
                }
            }
        }
        let pos = store.add_uniform("pos_emb", vec![p, dims.pos], EMB_BOUND, &mut rng);
        let input = dims.word + dims.pos + vocab.attrs.len();
        let h = dims.hidden;

        let cells = (kind == ModelKind::CTlm).then(|| {
            ["start", "duration"].map(|enc| {
                ["fwd", "bwd"].map(|dir| {
                    let gate = |part: &str, store: &mut ParamStore, rng: &mut ChaCha8Rng| {
                        let w = store.add_uniform(format!("{enc}_{dir}_{part}_w"), vec![h, input + h], glorot(input + h, h), rng);
                        let b = store.add(format!("{enc}_{dir}_{part}_b"), vec![h], vec![0.0; h]);
                        (w, b)
                    };
                    let (gate_w, gate_b) = gate("gate", &mut store, &mut rng);
                    let (cand_w, cand_b) = gate("cand", &mut store, &mut rng);
                    Cell { gate_w, gate_b, cand_w, cand_b }
                })
            })
        });
        let head_in = if kind == ModelKind::CTlm { 2 * h } else { input };
        let heads = [("start", 0.0), ("duration", 1.0)].map(|(name, bias)| Head {
            w: store.add_uniform(format!("{name}_w"), vec![1, head_in], glorot(head_in, 1), &mut rng),
            b: store.add(format!("{name}_b"), vec![1], vec![bias]),
        });
        let dct = store.add("dct_duration", vec![1], vec![1.0]);
        Ok(Model { kind, dims, d_min, vocab, store, ids: Ids { word, pos, dct, heads, cells } })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// Width of the word representation.
    pub fn input_dim(&self) -> usize {
        self.dims.word + self.dims.pos + self.vocab.attrs.len()
    }

    pub fn dct_duration(&self) -> f64 {
        self.store.tensor(self.ids.dct).data[0]
    }

    /// Keeps the DCT duration at or above `d_min`, where it still receives
    /// gradient.
    pub(crate) fn project(&mut self) {
        let d_min = self.d_min;
        for v in self.store.data_mut(self.ids.dct) {
            *v = v.max(d_min);
        }
    }

    pub(crate) fn bind<'t>(&self, tape: &'t Tape, store: &ParamStore) -> Bound<'t> {
        let p = |id| tape.param(store, id);
        Bound {
            word: p(self.ids.word),
            pos: p(self.ids.pos),
            dct: p(self.ids.dct),
            heads: self.ids.heads.map(|h| (p(h.w), p(h.b))),
            cells: self.ids.cells.map(|enc| enc.map(|dirs| dirs.map(|c| [c.gate_w, c.gate_b, c.cand_w, c.cand_b].map(p)))),
        }
    }

    fn repr_var<'t>(
        &self,
        tape: &'t Tape,
        b: &Bound<'t>,
        doc: &Document,
        attrs: &[Vec<f64>],
        i: usize,
        dropout: &mut Option<&mut Dropout>,
    ) -> Var<'t> {
        let t = &doc.tokens()[i];
        let (dw, dp) = (self.dims.word, self.dims.pos);
        let mut parts = vec![
            b.word.slice(self.vocab.word(&t.surface) * dw, dw),
            b.pos.slice(self.vocab.pos_tag(t.pos.as_deref()) * dp, dp),
        ];
        if !attrs[i].is_empty() {
            parts.push(tape.input(&attrs[i]));
        }
        let x = tape.concat(&parts);
        match dropout {
            Some(d) if d.rate > 0.0 => x * tape.input(&d.mask(x.len())),
            _ => x,
        }
    }

    /// Word representation of token `i`: word row, POS row, attribute block.
    pub fn represent(&self, doc: &Document, i: usize) -> Vec<f64> {
        let tape = Tape::new();
        let b = self.bind(&tape, &self.store);
        let attrs = self.attr_blocks(doc);
        self.repr_var(&tape, &b, doc, &attrs, i, &mut None).values()
    }

    /// Head-token representation of every entity of `doc`, in entity order;
    /// the DCT has none.
    pub fn represent_entities(&self, doc: &Document) -> Vec<Option<Vec<f64>>> {
        let tape = Tape::new();
        let b = self.bind(&tape, &self.store);
        let attrs = self.attr_blocks(doc);
        doc.entities()
            .iter()
            .map(|e| match e.kind {
                EntityKind::Dct => None,
                _ => e.head().map(|h| self.repr_var(&tape, &b, doc, &attrs, h, &mut None).values()),
            })
            .collect()
    }

    fn attr_blocks(&self, doc: &Document) -> Vec<Vec<f64>> {
        covering_entities(doc).into_iter().map(|e| self.vocab.attr_vector(e)).collect()
    }

    fn step<'t>(tape: &'t Tape, cell: &[Var<'t>; 4], x: Var<'t>, h: Var<'t>, units: usize) -> Var<'t> {
        let xh = tape.concat(&[x, h]);
        let z = tape.affine(cell[0], xh, Some(cell[1]), units).sigmoid();
        let c = tape.affine(cell[2], xh, Some(cell[3]), units).tanh();
        h + z * (c - h)
    }

    /// Interval variables of every entity of `doc`, in entity order.
    pub(crate) fn encode<'t>(
        &self,
        tape: &'t Tape,
        b: &Bound<'t>,
        doc: &Document,
        dropout: Option<&mut Dropout>,
    ) -> Vec<Interval<Var<'t>>> {
        self.place(tape, b, doc, dropout).into_iter().map(|(s, d)| Interval::from_start_duration(s, d, self.d_min)).collect()
    }

    /// Start and raw duration of every entity.
    fn place<'t>(
        &self,
        tape: &'t Tape,
        b: &Bound<'t>,
        doc: &Document,
        mut dropout: Option<&mut Dropout>,
    ) -> Vec<(Var<'t>, Var<'t>)> {
        let attrs = self.attr_blocks(doc);
        let heads: Vec<Option<usize>> =
            doc.entities().iter().map(|e| if e.kind == EntityKind::Dct { None } else { e.head() }).collect();
        let project = |k: usize, x: Var<'t>| tape.affine(b.heads[k].0, x, Some(b.heads[k].1), 1);
        let dct = || (tape.scalar(DCT_START), b.dct);

        match &b.cells {
            None => heads
                .iter()
                .map(|head| match *head {
                    Some(t) => {
                        let x = self.repr_var(tape, b, doc, &attrs, t, &mut dropout);
                        (project(0, x), project(1, x))
                    }
                    None => dct(),
                })
                .collect(),
            Some(cells) => {
                let n = doc.tokens().len();
                let xs: Vec<Var<'t>> = (0..n).map(|i| self.repr_var(tape, b, doc, &attrs, i, &mut dropout)).collect();
                let units = self.dims.hidden;
                let zero = tape.input(&vec![0.0; units]);
                // states[encoder][direction][token]
                let states: Vec<[Vec<Var<'t>>; 2]> = cells
                    .iter()
                    .map(|enc| {
                        let mut fwd = Vec::with_capacity(n);
                        let mut h = zero;
                        for &x in &xs {
                            h = Model::step(tape, &enc[0], x, h, units);
                            fwd.push(h);
                        }
                        let mut bwd = vec![zero; n];
                        let mut h = zero;
                        for i in (0..n).rev() {
                            h = Model::step(tape, &enc[1], xs[i], h, units);
                            bwd[i] = h;
                        }
                        [fwd, bwd]
                    })
                    .collect();
                heads
                    .iter()
                    .map(|head| match *head {
                        Some(t) => {
                            let out = |k: usize| project(k, tape.concat(&[states[k][0][t], states[k][1][t]]));
                            (out(0), out(1))
                        }
                        None => dct(),
                    })
                    .collect()
            }
        }
    }

    /// Predicted time-line over every entity of `doc`.
    pub fn predict(&self, doc: &Document) -> RelativeTimeline {
        let tape = Tape::new();
        let b = self.bind(&tape, &self.store);
        let placed = self.place(&tape, &b, doc, None);
        let starts = placed.iter().map(|p| p.0.item()).collect();
        let durations = placed.iter().map(|p| p.1.item()).collect();
        RelativeTimeline::for_document(doc, starts, durations, self.d_min)
    }

    pub fn predict_corpus(&self, docs: &[Document], exec: Exec) -> Vec<RelativeTimeline> {
        exec.map(docs, |_, d| self.predict(d))
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            kind: self.kind,
            d_min: self.d_min,
            dims: self.dims,
            vocab: self.vocab.clone(),
            params: self.store.to_checkpoint(),
        };
        serde_json::to_string(&file).expect("models always serialize")
    }

    /// Reads a checkpoint, checking that the stored tensors match the layout
    /// implied by its header.
    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(ModelError::Format(format!("unsupported {} v{}", file.format, file.version)));
        }
        let vocab = Vocab::from_parts(file.vocab.words, file.vocab.pos, file.vocab.attrs);
        let mut model = Model::new(file.kind, vocab, file.dims, file.d_min, file.params.seed, None)?;
        model.store.load_from(&file.params)?;
        Ok(model)
    }
}

const MODEL_FORMAT: &str = "reltime-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    kind: ModelKind,
    d_min: f64,
    dims: ModelDims,
    vocab: Vocab,
    params: Checkpoint,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autograd::finite_diff_check;
    use crate::corpus::{generate_synthetic, Entity, SynthConfig, TLink};
    use crate::pointalg::TLinkType::*;
    use crate::timeline::{links_loss, LossConfig, LossKind};

    fn small_dims() -> ModelDims {
        ModelDims { word: 4, pos: 2, hidden: 3 }
    }

    fn doc(tokens: &[&str]) -> Document {
        let toks = tokens.iter().map(|t| (t.to_string(), Some("NN".to_string()))).collect();
        let n = tokens.len();
        let ents = vec![
            Entity::new("t0", EntityKind::Dct, None),
            Entity::new("e1", EntityKind::Event, Some((0, 0))).with_attr("class", "STATE"),
            Entity::new("e2", EntityKind::Event, Some((n - 1, n - 1))),
        ];
        let links = vec![TLink::new("e1", "e2", Before), TLink::new("t0", "e2", Includes)];
        Document::new("d", toks, ents, links).unwrap()
    }

    #[test]
    fn representation_shape_and_blocks() {
        let d = doc(&["war", "of", "ended"]);
        let m = Model::new(ModelKind::STlm, Vocab::build([&d]), ModelDims::default(), 0.1, 1, None).unwrap();
        let x = m.represent(&d, 0);
        assert_eq!(x.len(), 50 + 10 + 2);
        assert_eq!(&x[60..], &[1.0, 1.0]);
        assert_eq!(&m.represent(&d, 1)[60..], &[0.0, 0.0]);

        let other = doc(&["peace", "of", "ended"]);
        let (a, b) = (m.represent(&d, 0), m.represent(&other, 0));
        let unk = &m.store().tensor(m.ids.word).data[..50];
        assert_eq!(&b[..50], unk);
        assert_ne!(&a[..50], unk);
        assert_eq!(a[50..], b[50..]);

        let all = m.represent_entities(&d);
        assert_eq!(all.len(), d.entities().len());
        for (e, r) in d.entities().iter().zip(&all) {
            match e.kind {
                EntityKind::Dct => assert!(r.is_none()),
                _ => assert_eq!(r.as_ref(), Some(&m.represent(&d, e.head().unwrap()))),
            }
        }
    }

    #[test]
    fn zero_weights_give_bias_positions() {
        let d = doc(&["war", "of", "ended"]);
        let mut m = Model::new(ModelKind::STlm, Vocab::build([&d]), small_dims(), 0.1, 1, None).unwrap();
        for (k, bias) in [(0, 2.5), (1, 0.7)] {
            let h = m.ids.heads[k];
            m.store.data_mut(h.w).fill(0.0);
            m.store.data_mut(h.b)[0] = bias;
        }
        let tl = m.predict(&d);
        for id in ["e1", "e2"] {
            let i = tl.index_of(id).unwrap();
            assert_eq!((tl.start(i), tl.duration(i)), (2.5, 0.7));
        }
        let dct = tl.index_of("t0").unwrap();
        assert_eq!((tl.start(dct), tl.duration(dct)), (0.0, 1.0));
    }

    #[test]
    fn stlm_ignores_context() {
        let a = doc(&["war", "of", "the", "ended"]);
        let b = doc(&["war", "then", "a", "ended"]);
        let m = Model::new(ModelKind::STlm, Vocab::build([&a, &b]), small_dims(), 0.1, 3, None).unwrap();
        let (ta, tb) = (m.predict(&a), m.predict(&b));
        for i in 0..3 {
            assert_eq!((ta.start(i), ta.duration(i)), (tb.start(i), tb.duration(i)));
        }
        let c = Model::new(ModelKind::CTlm, m.vocab().clone(), small_dims(), 0.1, 3, None).unwrap();
        assert_ne!(c.predict(&a).start(1), c.predict(&b).start(1));
    }

    #[test]
    fn single_token_with_zero_recurrence_is_affine_in_the_input() {
        let toks = vec![("war".to_string(), None)];
        let ents = vec![Entity::new("t0", EntityKind::Dct, None), Entity::new("e1", EntityKind::Event, Some((0, 0)))];
        let d = Document::new("d", toks, ents, vec![]).unwrap();
        let mut m = Model::new(ModelKind::CTlm, Vocab::build([&d]), small_dims(), 0.1, 5, None).unwrap();
        let units = m.dims.hidden;
        let input = m.input_dim();
        let cols = input + units;
        let cells = m.ids.cells.unwrap();
        for enc in cells {
            for c in enc {
                // zero the recurrent half of both weight matrices
                for w in [c.gate_w, c.cand_w] {
                    for r in 0..units {
                        m.store.data_mut(w)[r * cols + input..(r + 1) * cols].fill(0.0);
                    }
                }
            }
        }
        let x = m.represent(&d, 0);
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let state = |c: Cell| -> Vec<f64> {
            let t = |id: ParamId| m.store.tensor(id).data.clone();
            let (gw, gb, cw, cb) = (t(c.gate_w), t(c.gate_b), t(c.cand_w), t(c.cand_b));
            (0..units)
                .map(|r| {
                    let dot = |w: &[f64]| (0..x.len()).map(|k| w[r * cols + k] * x[k]).sum::<f64>();
                    sig(dot(&gw) + gb[r]) * (dot(&cw) + cb[r]).tanh()
                })
                .collect()
        };
        let hs: Vec<f64> = [state(cells[0][0]), state(cells[0][1])].concat();
        let w = &m.store.tensor(m.ids.heads[0].w).data;
        let expect = hs.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + m.store.tensor(m.ids.heads[0].b).data[0];
        assert!((m.predict(&d).start(1) - expect).abs() < 1e-12);
    }

    #[test]
    fn predictions_respect_min_duration() {
        let docs = generate_synthetic(&SynthConfig { docs: 3, ..SynthConfig::default() }, 4).unwrap();
        for kind in [ModelKind::STlm, ModelKind::CTlm] {
            let mut m = Model::new(kind, Vocab::build(&docs), small_dims(), 0.1, 2, None).unwrap();
            m.store.data_mut(m.ids.heads[1].b)[0] = -5.0;
            for tl in m.predict_corpus(&docs, Exec::Sequential) {
                for i in 0..tl.len() {
                    assert!(tl.end(i) - tl.start(i) >= 0.1);
                }
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let d = doc(&["war", "of", "ended"]);
        let m = Model::new(ModelKind::CTlm, Vocab::build([&d]), small_dims(), 0.1, 9, None).unwrap();
        let back = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(back.store().flat_values(), m.store().flat_values());
        assert_eq!(back.predict(&d).to_json(), m.predict(&d).to_json());
        assert_eq!(back.vocab(), m.vocab());
    }

    #[test]
    fn checkpoint_with_wrong_vocabulary_is_rejected() {
        let d = doc(&["war", "of", "ended"]);
        let m = Model::new(ModelKind::STlm, Vocab::build([&d]), small_dims(), 0.1, 9, None).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        v["vocab"]["words"].as_array_mut().unwrap().push("extra".into());
        let err = Model::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("word_emb"), "{err}");
    }

    #[test]
    fn embeddings_initialize_known_rows() {
        let d = doc(&["war", "of", "ended"]);
        let emb: HashMap<String, Vec<f64>> = [("war".to_string(), vec![0.5; 4])].into();
        let m = Model::new(ModelKind::STlm, Vocab::build([&d]), small_dims(), 0.1, 1, Some(&emb)).unwrap();
        assert_eq!(&m.represent(&d, 0)[..4], &[0.5; 4]);
        let bad: HashMap<String, Vec<f64>> = [("war".to_string(), vec![0.5; 3])].into();
        assert!(Model::new(ModelKind::STlm, Vocab::build([&d]), small_dims(), 0.1, 1, Some(&bad)).is_err());
    }

    #[test]
    fn model_gradients_match_finite_differences() {
        let d = doc(&["war", "of", "the", "ended"]);
        for kind in [ModelKind::STlm, ModelKind::CTlm] {
            let m = Model::new(kind, Vocab::build([&d]), small_dims(), 0.1, 11, None).unwrap();
            for loss in LossKind::ALL {
                let cfg = LossConfig::with_kind(loss);
                let links = d.indexed_tlinks();
                let report = finite_diff_check(
                    |tape, store| {
                        let b = m.bind(tape, store);
                        let iv = m.encode(tape, &b, &d, None);
                        links_loss(&links, &iv, &cfg, tape.scalar(0.0))
                    },
                    m.store(),
                    // 10h is the required 1e-3 slack from every kink
                    1e-4,
                );
                assert!(report.checked > 0);
                assert!(report.max_rel_error < 1e-4, "{kind} {loss}: {report:?}");
            }
        }
    }
}
