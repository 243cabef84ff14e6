use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use reltime::models::{ModelKind, Monitor};
use reltime::LossKind;

#[derive(Debug, Parser)]
#[command(name = "reltime", version, about = "Relative time-lines from temporally annotated text")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Loss: tau, ce, hinge or star.
    #[arg(long, global = true)]
    pub loss: Option<LossKind>,
    /// Worker threads for per-document work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

/// Loss parameters used wherever time-lines are scored or read.
#[derive(Debug, Clone, Default, Args)]
pub struct LossFlags {
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub m_tau: Option<f64>,
    #[arg(long)]
    pub m_h: Option<f64>,
}

/// Where predicted time-lines come from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Time-line JSON-lines file.
    #[arg(long)]
    pub timelines: Option<PathBuf>,
    /// Model checkpoint to predict with.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic JSON-lines corpus.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        docs: Option<usize>,
        #[arg(long)]
        entities: Option<usize>,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        dct_link_rate: Option<f64>,
        /// Put the temporal cue before the mention instead of in it.
        #[arg(long)]
        context_dependent: bool,
        #[arg(long)]
        words_per_class: Option<usize>,
        #[arg(long)]
        timex_rate: Option<f64>,
    },
    /// Fit a time-line to the TLinks of every document.
    Tl2rtl {
        /// Corpus: JSON-lines file, TimeML file or directory of TimeML files.
        #[arg(long)]
        corpus: PathBuf,
        /// JSON-lines corpus whose TLinks replace the annotated ones.
        #[arg(long)]
        tlinks: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[command(flatten)]
        loss: LossFlags,
        #[arg(long)]
        out: PathBuf,
        /// Per-document diagnostics (default: OUT.report.json).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train an S-TLM or C-TLM.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "c-tlm")]
        kind: ModelKind,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        dropout: Option<f64>,
        #[arg(long)]
        dev_fraction: Option<f64>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long, value_parser = parse_monitor)]
        monitor: Option<Monitor>,
        /// GloVe-style text file used to initialize word embeddings.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[command(flatten)]
        loss: LossFlags,
        /// Checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// Training log (default: OUT.log.csv).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Predict time-lines with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against a gold corpus.
    #[command(group = ArgGroup::new("prediction").required(true).multiple(false))]
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, group = "prediction")]
        timelines: Option<PathBuf>,
        #[arg(long, group = "prediction")]
        model: Option<PathBuf>,
        /// JSON-lines corpus of system TLinks.
        #[arg(long, group = "prediction")]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        #[command(flatten)]
        loss: LossFlags,
        /// JSON report (the text report always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Confusion matrix as CSV.
        #[arg(long)]
        confusion_csv: Option<PathBuf>,
    },
    /// Extreme starts/durations and token-distance statistics.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        loss: LossFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw one document's time-line.
    Render {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        source: Source,
        /// Document id (default: the first document).
        #[arg(long)]
        doc: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        loss: LossFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search over d_min, m_tau, dropout and recurrent units.
    Grid {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "c-tlm")]
        kind: ModelKind,
        /// JSON grid; missing axes keep the default ranges.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_monitor(s: &str) -> Result<Monitor, String> {
    match s {
        "dev-loss" => Ok(Monitor::DevLoss),
        "dev-f1" => Ok(Monitor::DevF1),
        _ => Err(format!("unknown monitor {s:?}, expected dev-loss or dev-f1")),
    }
}
