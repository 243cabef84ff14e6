use std::fmt::Write;

use super::RelativeTimeline;
use crate::corpus::{Document, EntityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Svg,
}

const TEXT_WIDTH: usize = 60;
const SVG_WIDTH: f64 = 600.0;
const SVG_LABEL: f64 = 200.0;
const ROW: f64 = 18.0;

struct Row {
    label: String,
    start: f64,
    end: f64,
    dct: bool,
}

fn rows(tl: &RelativeTimeline, doc: &Document) -> Vec<Row> {
    let mut rows: Vec<Row> = (0..tl.len())
        .map(|i| {
            let id = &tl.ids()[i];
            let ent = doc.entity(id);
            let dct = ent.is_some_and(|e| e.kind == EntityKind::Dct);
            let label = match ent {
                Some(e) if !dct => format!("{id} {}", doc.surface(e)),
                _ => id.clone(),
            };
            Row { label, start: tl.start(i), end: tl.end(i), dct }
        })
        .collect();
    rows.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)).then_with(|| a.label.cmp(&b.label)));
    rows
}

fn extent(rows: &[Row]) -> (f64, f64) {
    let lo = rows.iter().map(|r| r.start).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.end).fold(f64::NEG_INFINITY, f64::max);
    if rows.is_empty() {
        (0.0, 1.0)
    } else {
        (lo, if hi > lo { hi } else { lo + 1.0 })
    }
}

/// Horizontal bars, one per entity, sorted by start. The DCT is drawn with
/// `=` and flagged with `*` in text mode, and filled differently in SVG.
pub fn render(tl: &RelativeTimeline, doc: &Document, format: RenderFormat) -> String {
    let rows = rows(tl, doc);
    match format {
        RenderFormat::Text => text(&rows),
        RenderFormat::Svg => svg(&rows),
    }
}

fn text(rows: &[Row]) -> String {
    let (lo, hi) = extent(rows);
    let col = |x: f64| (((x - lo) / (hi - lo)) * TEXT_WIDTH as f64).round() as usize;
    let width = rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let (a, b) = (col(r.start).min(TEXT_WIDTH - 1), col(r.end).min(TEXT_WIDTH));
        let b = b.max(a + 1);
        let fill = if r.dct { '=' } else { '#' };
        let bar: String = (0..TEXT_WIDTH).map(|c| if c >= a && c < b { fill } else { ' ' }).collect();
        let mark = if r.dct { '*' } else { ' ' };
        let _ = writeln!(out, "{mark} {:<width$} |{bar}| {:>10.3} {:>10.3}", r.label, r.start, r.end);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg(rows: &[Row]) -> String {
    let (lo, hi) = extent(rows);
    let x = |v: f64| SVG_LABEL + (v - lo) / (hi - lo) * SVG_WIDTH;
    let height = ROW * rows.len() as f64 + 2.0 * ROW;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{height:.0}" font-family="monospace" font-size="11">"#,
        SVG_LABEL + SVG_WIDTH + 20.0
    );
    for (i, r) in rows.iter().enumerate() {
        let y = ROW * (i as f64 + 1.0);
        let fill = if r.dct { "#c0392b" } else { "#2c7fb8" };
        let w = (x(r.end) - x(r.start)).max(1.0);
        let _ = writeln!(out, r#"  <text x="4" y="{:.1}">{}</text>"#, y + 12.0, escape(&r.label));
        let _ = writeln!(
            out,
            r#"  <rect x="{:.2}" y="{y:.1}" width="{w:.2}" height="{:.1}" fill="{fill}"><title>{:.6} to {:.6}</title></rect>"#,
            x(r.start),
            ROW - 4.0,
            r.start,
            r.end
        );
    }
    out.push_str("</svg>\n");
    out
}
