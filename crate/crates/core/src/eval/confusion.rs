use std::fmt::Write;

use serde::Serialize;

use crate::corpus::TLink;
use crate::pointalg::TLinkType;

/// Gold-by-predicted counts for the most frequent gold labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    /// Gold labels kept, most frequent first.
    pub rows: Vec<TLinkType>,
    /// The row labels, then any other label predicted for a kept row, in
    /// canonical order.
    pub cols: Vec<TLinkType>,
    /// `counts[row][col]`.
    pub counts: Vec<Vec<usize>>,
    /// All evaluated TLinks, including dropped rows.
    pub total: usize,
}

/// Confusion over the `top_k` most frequent gold labels (ties in canonical
/// order). TLinks with another gold label are dropped from the cells but
/// still count towards `total`, so the cells sum to the covered share.
///
/// # Panics
/// If `predicted` is not aligned pairwise with `gold`.
pub fn confusion(gold: &[TLink], predicted: &[TLink], top_k: usize) -> ConfusionMatrix {
    assert_eq!(gold.len(), predicted.len(), "confusion needs aligned gold and predicted lists");
    for (g, p) in gold.iter().zip(predicted) {
        assert!(
            g.source == p.source && g.target == p.target,
            "misaligned pair: gold {}-{} vs predicted {}-{}",
            g.source,
            g.target,
            p.source,
            p.target
        );
    }
    let mut freq = [0usize; 11];
    for g in gold {
        freq[g.relation.ordinal()] += 1;
    }
    let mut rows: Vec<TLinkType> = TLinkType::ALL.into_iter().filter(|r| freq[r.ordinal()] > 0).collect();
    rows.sort_by_key(|r| (std::cmp::Reverse(freq[r.ordinal()]), r.ordinal()));
    rows.truncate(top_k);

    let kept: Vec<(&TLink, &TLink)> = gold.iter().zip(predicted).filter(|(g, _)| rows.contains(&g.relation)).collect();
    let mut cols = rows.clone();
    for r in TLinkType::ALL {
        if !cols.contains(&r) && kept.iter().any(|(_, p)| p.relation == r) {
            cols.push(r);
        }
    }
    let mut counts = vec![vec![0; cols.len()]; rows.len()];
    for (g, p) in kept {
        let i = rows.iter().position(|&l| l == g.relation).expect("kept row");
        let j = cols.iter().position(|&l| l == p.relation).expect("column added above");
        counts[i][j] += 1;
    }
    ConfusionMatrix { rows, cols, counts, total: gold.len() }
}

impl ConfusionMatrix {
    /// Cell as a percentage of all evaluated TLinks.
    pub fn percent(&self, gold: usize, predicted: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.counts[gold][predicted] as f64 / self.total as f64
        }
    }

    /// TLinks that landed in some cell.
    pub fn covered(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("gold");
        for l in &self.cols {
            let _ = write!(out, ",{}", l.label());
        }
        out.push('\n');
        for (i, g) in self.rows.iter().enumerate() {
            out.push_str(g.label());
            for j in 0..self.cols.len() {
                let _ = write!(out, ",{:.4}", self.percent(i, j));
            }
            out.push('\n');
        }
        out
    }

    /// Aligned percentages, rows gold, columns predicted.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:>6}", "g\\p");
        for l in &self.cols {
            let _ = write!(out, " {:>6}", l.abbrev());
        }
        out.push('\n');
        for (i, g) in self.rows.iter().enumerate() {
            let _ = write!(out, "{:>6}", g.abbrev());
            for j in 0..self.cols.len() {
                let _ = write!(out, " {:>6.1}", self.percent(i, j));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TLinkType::*;

    fn links(rels: &[TLinkType]) -> Vec<TLink> {
        rels.iter().enumerate().map(|(i, &r)| TLink::new(format!("a{i}"), format!("b{i}"), r)).collect()
    }

    #[test]
    fn all_correct_is_diagonal() {
        let g = links(&[Before, After, Before, Includes]);
        let m = confusion(&g, &g, 5);
        assert_eq!(m.rows, vec![Before, After, Includes]);
        assert_eq!(m.cols, m.rows);
        assert_eq!(m.counts, vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn reversed_is_one_off_diagonal_cell() {
        let m = confusion(&links(&[Before; 4]), &links(&[After; 4]), 5);
        assert_eq!((m.rows.clone(), m.cols.clone()), (vec![Before], vec![Before, After]));
        assert_eq!(m.counts, vec![vec![0, 4]]);
        assert_eq!(m.percent(0, 1), 100.0);
    }

    #[test]
    fn top_k_ten_link_fixture() {
        // gold: 3 B, 2 A, 2 II, 1 I, 1 S, 1 E
        let gold = links(&[Before, Before, Before, After, After, IsIncluded, IsIncluded, Includes, Simultaneous, Ends]);
        let pred = links(&[Before, After, Before, After, Before, IsIncluded, Simultaneous, Includes, Ends, Ends]);
        let m = confusion(&gold, &pred, 2);
        assert_eq!((m.rows.clone(), m.cols.clone()), (vec![Before, After], vec![Before, After]));
        assert_eq!(m.counts, vec![vec![2, 1], vec![1, 1]]);
        assert_eq!(m.total, 10);
        let share: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| m.percent(i, j)).sum();
        assert!((share - 50.0).abs() < 1e-12);

        let m = confusion(&gold, &pred, 5);
        // Singletons tie; ENDS and INCLUDES come first in canonical order.
        assert_eq!(m.rows, vec![Before, After, IsIncluded, Ends, Includes]);
        // II -> S adds a SIMULTANEOUS column; the S gold row is dropped.
        assert_eq!(m.cols, vec![Before, After, IsIncluded, Ends, Includes, Simultaneous]);
        assert_eq!(m.covered(), 9);
        assert_eq!(m.counts[2], vec![0, 0, 1, 0, 0, 1]);
        assert!(m.to_csv().starts_with("gold,BEFORE,AFTER,IS_INCLUDED,ENDS,INCLUDES,SIMULTANEOUS\nBEFORE,20.0000,10.0000"));
    }

    #[test]
    #[should_panic(expected = "misaligned")]
    fn misaligned_lists_panic() {
        let g = links(&[Before]);
        let p = vec![TLink::new("x", "y", Before)];
        confusion(&g, &p, 5);
    }
}
