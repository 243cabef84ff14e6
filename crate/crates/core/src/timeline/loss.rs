//! Point, relation and document losses, written once over [`Scalar`] so the
//! same code evaluates on `f64` and on tape variables.

use std::sync::OnceLock;

use super::{LossConfig, LossKind};
use crate::autograd::{sum_all, Scalar};
use crate::pointalg::{interpret, PointConstraint, PointOp, Side, TLinkType};

/// Realized interval of one entity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<S> {
    pub start: S,
    pub end: S,
}

impl<S: Scalar> Interval<S> {
    pub fn from_start_duration(start: S, duration: S, d_min: f64) -> Self {
        Interval { start, end: end_point(start, duration, d_min) }
    }

    fn side(&self, side: Side) -> S {
        match side {
            Side::Start => self.start,
            Side::End => self.end,
        }
    }
}

/// `start + max(duration, d_min)`. The sum rounds up by an ulp when plain
/// rounding would leave `end - start` just below the clamped duration.
pub fn end_point<S: Scalar>(start: S, duration: S, d_min: f64) -> S {
    start.add_span(duration.max_const(d_min))
}

/// Hinge loss of one point constraint between realized coordinates.
pub fn point_loss<S: Scalar>(op: PointOp, x: S, y: S, m_tau: f64) -> S {
    match op {
        PointOp::Less => (x.add_const(m_tau) - y).relu(),
        PointOp::Equal => (x - y).abs().add_const(-m_tau).relu(),
    }
}

/// Constraints of every relation over entities 0 (`x`) and 1 (`y`).
fn table() -> &'static [Vec<PointConstraint<u8>>; 11] {
    static TABLE: OnceLock<[Vec<PointConstraint<u8>>; 11]> = OnceLock::new();
    TABLE.get_or_init(|| TLinkType::ALL.map(|r| interpret(r, 0u8, 1u8)))
}

/// Sum of the point losses of `x r y`.
pub fn relation_loss<S: Scalar>(r: TLinkType, x: &Interval<S>, y: &Interval<S>, m_tau: f64) -> S {
    let pick = |p: &crate::pointalg::PointRef<u8>| if p.entity == 0 { x.side(p.side) } else { y.side(p.side) };
    let mut terms = table()[r.ordinal()].iter().map(|c| point_loss(c.op, pick(&c.lhs), pick(&c.rhs), m_tau));
    let first = terms.next().expect("every relation has a constraint");
    terms.fold(first, |acc, t| acc + t)
}

/// Relation losses for all eleven types, in canonical order.
pub fn relation_losses<S: Scalar>(x: &Interval<S>, y: &Interval<S>, m_tau: f64) -> [S; 11] {
    TLinkType::ALL.map(|r| relation_loss(r, x, y, m_tau))
}

/// Negative log-probability of `gold` under a soft-max over `scores`.
/// The largest score is subtracted first as a constant shift.
pub fn ce_from_scores<S: Scalar>(scores: &[S; 11], gold: TLinkType) -> S {
    let shift = scores.iter().map(Scalar::value).fold(f64::NEG_INFINITY, f64::max);
    let total = sum_all(scores[0].lift(0.0), scores.iter().map(|s| s.add_const(-shift).exp()));
    total.ln().add_const(shift) - scores[gold.ordinal()]
}

/// `Σ_{r' ≠ gold} max(S(r') - S(gold) + m_h, 0)`.
pub fn rank_from_scores<S: Scalar>(scores: &[S; 11], gold: TLinkType, m_h: f64) -> S {
    let g = scores[gold.ordinal()];
    let terms = TLinkType::ALL
        .iter()
        .filter(|&&r| r != gold)
        .map(|r| (scores[r.ordinal()] - g).add_const(m_h).relu());
    sum_all(g.lift(0.0), terms)
}

/// Loss of one annotated link `x gold y` under `cfg.kind`.
pub fn link_loss<S: Scalar>(gold: TLinkType, x: &Interval<S>, y: &Interval<S>, cfg: &LossConfig) -> S {
    if cfg.kind == LossKind::Tau {
        return relation_loss(gold, x, y, cfg.m_tau);
    }
    let scores = relation_losses(x, y, cfg.m_tau).map(|l| -l);
    match cfg.kind {
        LossKind::Tau => unreachable!(),
        LossKind::TauCe => ce_from_scores(&scores, gold),
        LossKind::TauH => rank_from_scores(&scores, gold, cfg.m_h),
        LossKind::Star => {
            -scores[gold.ordinal()] + ce_from_scores(&scores, gold) + rank_from_scores(&scores, gold, cfg.m_h)
        }
    }
}

/// Document loss over indexed links `(source, target, relation)`; `zero`
/// is returned when there are no links.
pub fn links_loss<S: Scalar>(
    links: &[(usize, usize, TLinkType)],
    intervals: &[Interval<S>],
    cfg: &LossConfig,
    zero: S,
) -> S {
    sum_all(zero, links.iter().map(|&(a, b, r)| link_loss(r, &intervals[a], &intervals[b], cfg)))
}

/// Relation with the lowest relation loss; ties go to the earlier type in
/// canonical order.
pub fn derive_from_intervals(x: &Interval<f64>, y: &Interval<f64>, m_tau: f64) -> TLinkType {
    let losses = relation_losses(x, y, m_tau);
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate().skip(1) {
        if l < losses[best] {
            best = i;
        }
    }
    TLinkType::ALL[best]
}
