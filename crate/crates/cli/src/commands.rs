use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::path::{Path, PathBuf};

use reltime::corpus::{generate_synthetic, load_embeddings, write_json_corpus, SynthConfig};
use reltime::eval::{assign_labels, confusion, corpus_awareness, distance_report, extremes_report};
use reltime::exec::with_jobs;
use reltime::models::{grid_search, split_dev, train, Grid, Model, ModelError, ModelKind, TrainConfig};
use reltime::timeline::{parse_timelines, render, write_timelines, RenderFormat};
use reltime::tl2rtl::{fit_corpus, summarize, DocFit, FitConfig};
use reltime::{Document, Exec, LossConfig, LossKind, RelativeTimeline, TLink};
use serde::Serialize;
use serde_json::json;

use crate::args::{Cli, Command, Common, Format, LossFlags, Source};
use crate::manifest::Recorder;
use crate::{io, sibling, CliError};

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::Config(_) | ModelError::NoDevLinks => usage(e),
        _ => runtime(e),
    }
}

fn json_pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let Cli { common, command } = cli;
    with_jobs(common.jobs, move || match command {
        Command::Generate { out, docs, entities, density, dct_link_rate, context_dependent, words_per_class, timex_rate } => {
            let mut cfg: SynthConfig = io::config_file(common.config.as_deref())?;
            set(&mut cfg.docs, docs);
            set(&mut cfg.entities_per_doc, entities);
            set(&mut cfg.density, density);
            set(&mut cfg.dct_link_rate, dct_link_rate);
            set(&mut cfg.words_per_class, words_per_class);
            set(&mut cfg.timex_rate, timex_rate);
            cfg.context_dependent |= context_dependent;
            generate(&common, &cfg, &out)
        }
        Command::Tl2rtl { corpus, tlinks, epochs, lr, loss, out, report } => {
            let mut cfg: FitConfig = io::config_file(common.config.as_deref())?;
            apply_loss(&mut cfg.loss, common.loss, &loss);
            set(&mut cfg.max_epochs, epochs);
            set(&mut cfg.adam.lr, lr);
            cfg.validate().map_err(usage)?;
            let report = report.unwrap_or_else(|| sibling(&out, "report.json"));
            tl2rtl(&common, &cfg, &corpus, tlinks.as_deref(), &out, &report)
        }
        Command::Train {
            corpus,
            kind,
            epochs,
            patience,
            batch_size,
            dropout,
            dev_fraction,
            lr,
            hidden,
            monitor,
            embeddings,
            loss,
            out,
            log,
        } => {
            let mut cfg: TrainConfig = io::config_file(common.config.as_deref())?;
            apply_loss(&mut cfg.loss, common.loss, &loss);
            set(&mut cfg.max_epochs, epochs);
            set(&mut cfg.patience, patience);
            set(&mut cfg.batch_size, batch_size);
            set(&mut cfg.dropout, dropout);
            set(&mut cfg.dev_fraction, dev_fraction);
            set(&mut cfg.adam.lr, lr);
            set(&mut cfg.dims.hidden, hidden);
            set(&mut cfg.monitor, monitor);
            set(&mut cfg.seed, common.seed);
            cfg.validate().map_err(model_error)?;
            let log = log.unwrap_or_else(|| sibling(&out, "log.csv"));
            cmd_train(&common, kind, &cfg, &corpus, embeddings.as_deref(), &out, &log)
        }
        Command::Predict { model, corpus, out } => {
            no_config(&common)?;
            predict(&common, &model, &corpus, &out)
        }
        Command::Eval { gold, timelines, model, system, top_k, loss, out, confusion_csv } => {
            let cfg = loss_config(&common, &loss)?;
            let pred = match (timelines, model, system) {
                (Some(p), _, _) => Prediction::Timelines(p),
                (_, Some(p), _) => Prediction::Model(p),
                (_, _, Some(p)) => Prediction::System(p),
                _ => return Err(usage("one of --timelines, --model or --system is required")),
            };
            eval(&common, &cfg, &gold, &pred, top_k, out.as_deref(), confusion_csv.as_deref())
        }
        Command::Analyze { corpus, source, k, loss, out } => {
            let cfg = loss_config(&common, &loss)?;
            analyze(&common, &cfg, &corpus, &Prediction::from(source), k, out.as_deref())
        }
        Command::Render { corpus, source, doc, format, loss, out } => {
            let cfg = loss_config(&common, &loss)?;
            cmd_render(&common, &cfg, &corpus, &Prediction::from(source), doc.as_deref(), format, out.as_deref())
        }
        Command::Grid { corpus, kind, grid, epochs, patience, out } => {
            let mut base: TrainConfig = io::config_file(common.config.as_deref())?;
            if let Some(kind) = common.loss {
                base.loss.kind = kind;
            }
            set(&mut base.max_epochs, epochs);
            set(&mut base.patience, patience);
            set(&mut base.seed, common.seed);
            base.validate().map_err(model_error)?;
            let grid: Grid = io::config_file(grid.as_deref())?;
            cmd_grid(&common, kind, &base, &grid, &corpus, &out)
        }
    })
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_loss(cfg: &mut LossConfig, kind: Option<LossKind>, flags: &LossFlags) {
    set(&mut cfg.kind, kind);
    set(&mut cfg.d_min, flags.d_min);
    set(&mut cfg.m_tau, flags.m_tau);
    set(&mut cfg.m_h, flags.m_h);
}

fn loss_config(common: &Common, flags: &LossFlags) -> Result<LossConfig, CliError> {
    let mut cfg: LossConfig = io::config_file(common.config.as_deref())?;
    apply_loss(&mut cfg, common.loss, flags);
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn no_config(common: &Common) -> Result<(), CliError> {
    match &common.config {
        Some(p) => Err(usage(format!("{}: this subcommand takes no config file", p.display()))),
        None => Ok(()),
    }
}

fn sorted(mut docs: Vec<Document>) -> Vec<Document> {
    docs.sort_by(|a, b| a.id().cmp(b.id()));
    docs
}

fn generate(common: &Common, cfg: &SynthConfig, out: &Path) -> Result<(), CliError> {
    let mut rec = Recorder::new("generate", common.jobs);
    cfg.validate().map_err(usage)?;
    let seed = common.seed.unwrap_or(1);
    let docs = generate_synthetic(cfg, seed).map_err(usage)?;
    io::write(out, &write_json_corpus(&docs))?;
    eprintln!("wrote {} documents to {}", docs.len(), out.display());
    rec.config(cfg);
    rec.seed = Some(seed);
    rec.output(out);
    rec.write(common.manifest.as_deref())
}

#[derive(Serialize)]
struct FitEntry<'a> {
    doc: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    satisfied: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistent: Option<bool>,
}

impl<'a> From<&'a DocFit> for FitEntry<'a> {
    fn from(f: &'a DocFit) -> Self {
        match &f.result {
            Ok(r) => FitEntry {
                doc: &f.doc,
                error: None,
                loss: Some(r.loss),
                satisfied: Some(r.satisfied),
                epochs: Some(r.epochs),
                converged: Some(r.converged),
                consistent: Some(r.consistent),
            },
            Err(e) => FitEntry {
                doc: &f.doc,
                error: Some(e),
                loss: None,
                satisfied: None,
                epochs: None,
                converged: None,
                consistent: None,
            },
        }
    }
}

fn tl2rtl(
    common: &Common,
    cfg: &FitConfig,
    corpus: &Path,
    tlinks: Option<&Path>,
    out: &Path,
    report: &Path,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("tl2rtl", common.jobs);
    let seed = common.seed.unwrap_or(1);
    let replacement: Option<HashMap<String, Vec<TLink>>> = match tlinks {
        None => None,
        Some(p) => {
            rec.input(p);
            Some(io::corpus(p)?.into_iter().map(|d| (d.id().to_string(), d.tlinks().to_vec())).collect())
        }
    };

    // Unreadable documents become error entries in the report.
    let mut failed: Vec<DocFit> = Vec::new();
    let mut docs = Vec::new();
    for (label, parsed) in io::corpus_each(corpus)? {
        let doc = parsed.and_then(|d| match &replacement {
            None => Ok(d),
            Some(map) => match map.get(d.id()) {
                Some(links) => d.with_tlinks(links.clone()).map_err(|e| e.to_string()),
                None => Err(format!("document {:?} is missing from the TLink file", d.id())),
            },
        });
        match doc {
            Ok(d) => docs.push(d),
            Err(e) => failed.push(DocFit { doc: label, result: Err(e) }),
        }
    }
    let docs = sorted(docs);
    let (mut fits, _) = fit_corpus(&docs, cfg, seed, Exec::best());
    fits.extend(failed);
    fits.sort_by(|a, b| a.doc.cmp(&b.doc));
    let summary = summarize(&fits, cfg.eps_conv);

    let timelines: Vec<(&str, &RelativeTimeline)> =
        fits.iter().filter_map(|f| f.result.as_ref().ok().map(|r| (f.doc.as_str(), &r.timeline))).collect();
    let entries: Vec<FitEntry> = fits.iter().map(FitEntry::from).collect();
    io::write(report, &json_pretty(&json!({ "summary": summary, "documents": entries })))?;
    if summary.docs == summary.failed {
        return Err(runtime(format!("no document could be fitted; see {}", report.display())));
    }
    io::write(out, &write_timelines(timelines))?;
    eprintln!(
        "fitted {}/{} documents, {} converged, mean loss {:.3e}, mean satisfied {:.4}",
        summary.docs - summary.failed,
        summary.docs,
        summary.converged,
        summary.mean_loss,
        summary.mean_satisfied
    );

    rec.config(cfg);
    rec.seed = Some(seed);
    rec.input(corpus);
    rec.output(out);
    rec.output(report);
    rec.write(common.manifest.as_deref())
}

fn cmd_train(
    common: &Common,
    kind: ModelKind,
    cfg: &TrainConfig,
    corpus: &Path,
    embeddings: Option<&Path>,
    out: &Path,
    log: &Path,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("train", common.jobs);
    let docs = io::corpus(corpus)?;
    let emb = match embeddings {
        Some(p) => {
            rec.input(p);
            Some(load_embeddings(p, cfg.dims.word).map_err(runtime)?)
        }
        None => None,
    };
    let trained = train(kind, &docs, cfg, emb.as_ref()).map_err(model_error)?;
    io::write(out, &trained.model.to_json())?;
    io::write(log, &trained.log.to_csv())?;
    let best = trained.log.rows.iter().find(|r| r.epoch == trained.log.best_epoch);
    eprintln!(
        "{kind}: best epoch {} of {}{}, dev F1 {:.3}",
        trained.log.best_epoch,
        trained.log.rows.len(),
        if trained.log.stopped_early { " (early stop)" } else { "" },
        best.map_or(f64::NAN, |r| r.dev_f1)
    );

    rec.config(&json!({ "kind": kind, "train": cfg }));
    rec.seed = Some(cfg.seed);
    rec.input(corpus);
    rec.output(out);
    rec.output(log);
    rec.write(common.manifest.as_deref())
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    Model::from_json(&io::read(path)?).map_err(|e| CliError::io(path, e))
}

fn predict(common: &Common, model_path: &Path, corpus: &Path, out: &Path) -> Result<(), CliError> {
    let mut rec = Recorder::new("predict", common.jobs);
    let model = load_model(model_path)?;
    let docs = sorted(io::corpus(corpus)?);
    let tls = model.predict_corpus(&docs, Exec::best());
    io::write(out, &write_timelines(docs.iter().map(|d| d.id()).zip(&tls)))?;
    eprintln!("predicted {} time-lines", tls.len());

    rec.config(&json!({ "kind": model.kind(), "d_min": model.d_min(), "dims": model.dims() }));
    rec.input(model_path);
    rec.input(corpus);
    rec.output(out);
    rec.write(common.manifest.as_deref())
}

enum Prediction {
    Timelines(PathBuf),
    Model(PathBuf),
    /// A corpus whose TLinks are the system output.
    System(PathBuf),
}

impl From<Source> for Prediction {
    fn from(s: Source) -> Self {
        match (s.timelines, s.model) {
            (Some(p), _) => Prediction::Timelines(p),
            (None, Some(p)) => Prediction::Model(p),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

impl Prediction {
    fn path(&self) -> &Path {
        match self {
            Prediction::Timelines(p) | Prediction::Model(p) | Prediction::System(p) => p,
        }
    }

    /// One time-line per document of `docs`, in the same order. With
    /// `exact`, a time-line file may not hold documents outside `docs`.
    fn timelines(&self, docs: &[Document], cfg: &LossConfig, exact: bool) -> Result<Vec<RelativeTimeline>, CliError> {
        let tls = match self {
            Prediction::Model(p) => load_model(p)?.predict_corpus(docs, Exec::best()),
            Prediction::Timelines(p) => {
                let mut by_doc: BTreeMap<String, RelativeTimeline> = BTreeMap::new();
                for (id, tl) in parse_timelines(&io::read(p)?, cfg.d_min).map_err(|e| CliError::io(p, e))? {
                    if by_doc.insert(id.clone(), tl).is_some() {
                        return Err(CliError::io(p, format!("two time-lines for document {id:?}")));
                    }
                }
                let mut out = Vec::with_capacity(docs.len());
                for d in docs {
                    let tl = by_doc
                        .remove(d.id())
                        .ok_or_else(|| CliError::io(p, format!("no time-line for document {:?}", d.id())))?;
                    out.push(tl);
                }
                if let Some(extra) = by_doc.keys().next().filter(|_| exact) {
                    return Err(CliError::io(p, format!("time-line for unknown document {extra:?}")));
                }
                out
            }
            Prediction::System(_) => unreachable!("system TLinks carry no time-lines"),
        };
        for (d, tl) in docs.iter().zip(&tls) {
            tl.check_covers(d).map_err(|e| CliError::io(self.path(), e))?;
        }
        Ok(tls)
    }
}

/// System TLinks per gold document, aligned with `gold`.
fn system_links(gold: &[Document], path: &Path) -> Result<Vec<Vec<TLink>>, CliError> {
    let mut by_doc: BTreeMap<String, Document> =
        io::corpus(path)?.into_iter().map(|d| (d.id().to_string(), d)).collect();
    let mut out = Vec::with_capacity(gold.len());
    for g in gold {
        let sys = by_doc
            .remove(g.id())
            .ok_or_else(|| CliError::io(path, format!("no document {:?}", g.id())))?;
        for l in sys.tlinks() {
            if let Some(id) = [&l.source, &l.target].into_iter().find(|id| g.entity(id).is_none()) {
                return Err(CliError::io(path, format!("document {:?}: entity {id:?} is not in the gold document", g.id())));
            }
        }
        out.push(sys.tlinks().to_vec());
    }
    if let Some(extra) = by_doc.keys().next() {
        return Err(CliError::io(path, format!("document {extra:?} is not in the gold corpus")));
    }
    Ok(out)
}

/// For each gold link, the system relation on the same pair (read in either
/// direction); gold links the system leaves out are dropped.
fn align(gold: &[TLink], system: &[TLink]) -> (Vec<TLink>, Vec<TLink>) {
    let mut by_pair: HashMap<(&str, &str), reltime::TLinkType> = HashMap::new();
    for l in system {
        by_pair.entry((&l.source, &l.target)).or_insert(l.relation);
        by_pair.entry((&l.target, &l.source)).or_insert(l.relation.invert());
    }
    let mut g = Vec::new();
    let mut s = Vec::new();
    for l in gold {
        if let Some(&r) = by_pair.get(&(l.source.as_str(), l.target.as_str())) {
            g.push(l.clone());
            s.push(TLink::new(l.source.clone(), l.target.clone(), r));
        }
    }
    (g, s)
}

fn eval(
    common: &Common,
    cfg: &LossConfig,
    gold_path: &Path,
    pred: &Prediction,
    top_k: usize,
    out: Option<&Path>,
    confusion_csv: Option<&Path>,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("eval", common.jobs);
    let gold = sorted(io::corpus(gold_path)?);
    let system: Vec<Vec<TLink>> = match pred {
        Prediction::System(p) => system_links(&gold, p)?,
        _ => {
            let tls = pred.timelines(&gold, cfg, true)?;
            gold.iter().zip(&tls).map(|(d, tl)| assign_labels(tl, d.tlinks(), cfg)).collect()
        }
    };
    let items: Vec<(String, Vec<TLink>, Vec<TLink>)> =
        gold.iter().zip(&system).map(|(d, s)| (d.id().to_string(), d.tlinks().to_vec(), s.clone())).collect();
    let report = corpus_awareness(&items, Exec::best());

    let (mut g_all, mut s_all) = (Vec::new(), Vec::new());
    for (d, s) in gold.iter().zip(&system) {
        let (g, s) = align(d.tlinks(), s);
        g_all.extend(g);
        s_all.extend(s);
    }
    let matrix = confusion(&g_all, &s_all, top_k);

    let mut text = format!(
        "precision {:.3}\nrecall    {:.3}\nf1        {:.3}\n",
        report.precision, report.recall, report.f1
    );
    text += &format!(
        "documents {}, system links {}/{} verified, reference links {}/{} recalled\n",
        gold.len(),
        report.system_correct,
        report.system_total,
        report.reference_correct,
        report.reference_total
    );
    if !report.inconsistent_docs.is_empty() {
        text += &format!("inconsistent system output: {}\n", report.inconsistent_docs.join(", "));
    }
    text += &format!("\nconfusion, top {} gold labels (% of {} kept links, {} in all):\n", top_k, matrix.covered(), g_all.len());
    text += &matrix.to_table();
    print!("{text}");

    if let Some(p) = out {
        io::write(p, &json_pretty(&json!({ "awareness": report, "confusion": matrix })))?;
        rec.output(p);
    }
    if let Some(p) = confusion_csv {
        io::write(p, &matrix.to_csv())?;
        rec.output(p);
    }
    rec.config(&json!({ "loss": cfg, "top_k": top_k }));
    rec.input(gold_path);
    rec.input(pred.path());
    rec.write(common.manifest.as_deref())
}

fn analyze(
    common: &Common,
    cfg: &LossConfig,
    corpus: &Path,
    pred: &Prediction,
    k: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("analyze", common.jobs);
    let docs = sorted(io::corpus(corpus)?);
    let tls = pred.timelines(&docs, cfg, false)?;
    let items: Vec<(&Document, &RelativeTimeline)> = docs.iter().zip(&tls).collect();
    let extremes = extremes_report(&items, k);
    let distance = distance_report(&items, cfg);
    print!("{}\n{}", extremes.to_table(), distance.to_table());
    if let Some(p) = out {
        io::write(p, &json_pretty(&json!({ "extremes": extremes, "distance": distance })))?;
        rec.output(p);
    }
    rec.config(&json!({ "loss": cfg, "k": k }));
    rec.input(corpus);
    rec.input(pred.path());
    rec.write(common.manifest.as_deref())
}

fn cmd_render(
    common: &Common,
    cfg: &LossConfig,
    corpus: &Path,
    pred: &Prediction,
    doc: Option<&str>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("render", common.jobs);
    let docs = io::corpus(corpus)?;
    let d = match doc {
        Some(id) => docs
            .iter()
            .find(|d| d.id() == id)
            .ok_or_else(|| CliError::io(corpus, format!("no document {id:?}")))?,
        None => docs.first().ok_or_else(|| CliError::io(corpus, "empty corpus"))?,
    };
    let tl = pred.timelines(std::slice::from_ref(d), cfg, false)?.remove(0);
    let fmt = match format {
        Format::Text => RenderFormat::Text,
        Format::Svg => RenderFormat::Svg,
    };
    io::emit(out, &render(&tl, d, fmt))?;
    if let Some(p) = out {
        rec.output(p);
    }
    rec.config(&json!({ "loss": cfg, "doc": d.id(), "format": format!("{format:?}").to_lowercase() }));
    rec.input(corpus);
    rec.input(pred.path());
    rec.write(common.manifest.as_deref())
}

fn cmd_grid(
    common: &Common,
    kind: ModelKind,
    base: &TrainConfig,
    grid: &Grid,
    corpus: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("grid", common.jobs);
    let docs = io::corpus(corpus)?;
    if base.dev_fraction == 0.0 || docs.len() < 2 {
        return Err(model_error(ModelError::NoDevLinks));
    }
    let (tr, dev) = split_dev(&docs, base.dev_fraction, base.seed);
    let result = grid_search(kind, &tr, &dev, base, grid, None, Exec::best()).map_err(model_error)?;
    print!("{}", result.to_table());
    io::write(out, &json_pretty(&result))?;

    rec.config(&json!({ "kind": kind, "base": base, "grid": grid }));
    rec.seed = Some(base.seed);
    rec.input(corpus);
    rec.output(out);
    rec.write(common.manifest.as_deref())
}
