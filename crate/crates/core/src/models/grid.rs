use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{evaluate, train_with_dev, ModelError, ModelKind, TrainConfig};
use crate::corpus::Document;
use crate::exec::Exec;

/// Values tried per hyper-parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub d_min: Vec<f64>,
    pub m_tau: Vec<f64>,
    pub dropout: Vec<f64>,
    pub hidden: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            d_min: vec![1.0, 0.1, 0.01],
            m_tau: vec![0.0, 0.025, 0.05, 0.1],
            dropout: vec![0.0, 0.1, 0.2, 0.4, 0.8],
            hidden: vec![10, 25, 50],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub d_min: f64,
    pub m_tau: f64,
    pub dropout: f64,
    pub hidden: usize,
}

impl Grid {
    /// Every combination, `d_min` outermost and `hidden` innermost.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &d_min in &self.d_min {
            for &m_tau in &self.m_tau {
                for &dropout in &self.dropout {
                    for &hidden in &self.hidden {
                        out.push(GridPoint { d_min, m_tau, dropout, hidden });
                    }
                }
            }
        }
        out
    }

    fn apply(p: &GridPoint, base: &TrainConfig) -> TrainConfig {
        let mut cfg = base.clone();
        cfg.loss.d_min = p.d_min;
        cfg.loss.m_tau = p.m_tau;
        cfg.dropout = p.dropout;
        cfg.dims.hidden = p.hidden;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub point: GridPoint,
    pub dev_f1: f64,
    pub dev_loss: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    /// One row per combination, in enumeration order.
    pub rows: Vec<GridRow>,
    /// Row with the highest dev F1; the earliest wins a tie.
    pub best: usize,
}

impl GridResult {
    pub fn best_row(&self) -> &GridRow {
        &self.rows[self.best]
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:>6} {:>6} {:>7} {:>6} {:>8} {:>10} {:>6}\n", "d_min", "m_tau", "dropout", "hidden", "dev_f1", "dev_loss", "epoch");
        for (i, r) in self.rows.iter().enumerate() {
            let p = r.point;
            let mark = if i == self.best { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:>6} {:>6} {:>7} {:>6} {:>8.4} {:>10.5} {:>6}{mark}",
                p.d_min, p.m_tau, p.dropout, p.hidden, r.dev_f1, r.dev_loss, r.best_epoch
            );
        }
        out
    }
}

/// Trains one model per grid combination on `train_docs` and ranks them by
/// temporal-awareness F1 on `dev`. Each run uses `base` with the grid
/// values substituted; runs are independent and may go in parallel.
pub fn grid_search(
    kind: ModelKind,
    train_docs: &[Document],
    dev: &[Document],
    base: &TrainConfig,
    grid: &Grid,
    embeddings: Option<&HashMap<String, Vec<f64>>>,
    exec: Exec,
) -> Result<GridResult, ModelError> {
    let points = grid.points();
    if points.is_empty() {
        return Err(ModelError::Config("empty grid: every hyper-parameter needs at least one value".into()));
    }
    let configs: Vec<TrainConfig> = points.iter().map(|p| Grid::apply(p, base)).collect();
    for c in &configs {
        c.validate()?;
    }
    let runs = exec.map(&configs, |_, cfg| {
        let t = train_with_dev(kind, train_docs, dev, cfg, embeddings)?;
        let (dev_loss, dev_f1) = evaluate(&t.model, dev, &cfg.loss, Exec::Sequential);
        Ok::<_, ModelError>((dev_f1, dev_loss, t.log.best_epoch))
    });
    let mut rows = Vec::with_capacity(runs.len());
    for (point, run) in points.into_iter().zip(runs) {
        let (dev_f1, dev_loss, best_epoch) = run?;
        rows.push(GridRow { point, dev_f1, dev_loss, best_epoch });
    }
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.dev_f1 > rows[best].dev_f1 {
            best = i;
        }
    }
    Ok(GridResult { rows, best })
}
