use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A named trainable tensor with its Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    /// Row-major values.
    pub data: Vec<f64>,
    #[serde(rename = "adam_m")]
    pub m: Vec<f64>,
    #[serde(rename = "adam_v")]
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 0.001, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig { lr, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lr > 0.0) {
            return Err(format!("learning rate must be positive, got {}", self.lr));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(format!("{name} must be in (0, 1), got {b}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("checkpoint format: {0}")]
    Format(String),
    #[error("tensor {name:?}: checkpoint shape {found:?} does not match model shape {expected:?}")]
    ShapeMismatch { name: String, expected: Vec<usize>, found: Vec<usize> },
    #[error("tensor {0:?} missing from checkpoint")]
    Missing(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Named tensors plus optimizer state. One store belongs to one optimizer:
/// the Adam step count is shared by all its tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    tensors: Vec<Tensor>,
    index: HashMap<String, usize>,
    step: u64,
    seed: u64,
}

/// Gradients aligned with the tensors of a store.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads(Vec<Vec<f64>>);

impl ParamGrads {
    pub fn zeros(store: &ParamStore) -> Self {
        ParamGrads(store.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect())
    }

    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.0[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.0[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &[f64])> {
        self.0.iter().enumerate().map(|(i, g)| (ParamId(i), g.as_slice()))
    }
}

const FORMAT: &str = "reltime-params";
const VERSION: u32 = 1;

/// On-disk form of a [`ParamStore`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub step: u64,
    pub tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new(seed: u64) -> Self {
        ParamStore { tensors: Vec::new(), index: HashMap::new(), step: 0, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Registers a tensor.
    ///
    /// # Panics
    /// On a duplicate name or when `data` does not match `shape`.
    pub fn add(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> ParamId {
        let name = name.into();
        assert_eq!(shape.iter().product::<usize>(), data.len(), "tensor {name:?} data does not match shape");
        assert!(!self.index.contains_key(&name), "duplicate tensor {name:?}");
        let id = ParamId(self.tensors.len());
        self.index.insert(name.clone(), id.0);
        let n = data.len();
        self.tensors.push(Tensor { name, shape, data, m: vec![0.0; n], v: vec![0.0; n] });
        id
    }

    pub fn add_uniform(&mut self, name: impl Into<String>, shape: Vec<usize>, bound: f64, rng: &mut impl Rng) -> ParamId {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        self.add(name, shape, data)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).map(|&i| ParamId(i))
    }

    pub fn tensor(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn data_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.tensors[id.0].data
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    /// All parameter values, concatenated in registration order.
    pub fn flat_values(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Bias-corrected Adam update, in place. Increments the step count once.
    ///
    /// # Panics
    /// If `grads` was built for a store with a different layout.
    pub fn adam_step(&mut self, grads: &ParamGrads, cfg: &AdamConfig) {
        assert_eq!(grads.0.len(), self.tensors.len(), "gradient set does not match store");
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for (tensor, g) in self.tensors.iter_mut().zip(&grads.0) {
            assert_eq!(g.len(), tensor.data.len(), "gradient shape mismatch for {:?}", tensor.name);
            for k in 0..g.len() {
                let m = cfg.beta1 * tensor.m[k] + (1.0 - cfg.beta1) * g[k];
                let v = cfg.beta2 * tensor.v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                tensor.m[k] = m;
                tensor.v[k] = v;
                tensor.data[k] -= cfg.lr * (m / c1) / ((v / c2).sqrt() + cfg.eps);
            }
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            seed: self.seed,
            step: self.step,
            tensors: self.tensors.clone(),
        }
    }

    /// Rebuilds a store from a checkpoint, checking internal shapes.
    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Self, StoreError> {
        if ckpt.format != FORMAT || ckpt.version != VERSION {
            return Err(StoreError::Format(format!("unsupported {} v{}", ckpt.format, ckpt.version)));
        }
        let mut store = ParamStore::new(ckpt.seed);
        store.step = ckpt.step;
        for t in ckpt.tensors {
            let n: usize = t.shape.iter().product();
            if t.data.len() != n || t.m.len() != n || t.v.len() != n {
                return Err(StoreError::Format(format!("tensor {:?} has values inconsistent with shape {:?}", t.name, t.shape)));
            }
            if store.index.contains_key(&t.name) {
                return Err(StoreError::Format(format!("duplicate tensor {:?}", t.name)));
            }
            store.index.insert(t.name.clone(), store.tensors.len());
            store.tensors.push(t);
        }
        Ok(store)
    }

    /// Loads checkpoint values into this store's layout; every tensor must be
    /// present with an identical shape.
    pub fn load_from(&mut self, ckpt: &Checkpoint) -> Result<(), StoreError> {
        let loaded = ParamStore::from_checkpoint(ckpt.clone())?;
        for t in &mut self.tensors {
            let Some(src) = loaded.id(&t.name).map(|id| loaded.tensor(id)) else {
                return Err(StoreError::Missing(t.name.clone()));
            };
            if src.shape != t.shape {
                return Err(StoreError::ShapeMismatch { name: t.name.clone(), expected: t.shape.clone(), found: src.shape.clone() });
            }
        }
        for t in &mut self.tensors {
            let src = loaded.tensor(loaded.id(&t.name).expect("checked above"));
            t.data.clone_from(&src.data);
            t.m.clone_from(&src.m);
            t.v.clone_from(&src.v);
        }
        self.step = loaded.step;
        self.seed = loaded.seed;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_checkpoint()).expect("checkpoints always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        ParamStore::from_checkpoint(serde_json::from_str(text)?)
    }
}
