//! TimeML temporal links and their point-algebra interpretation.
//!
//! Each TLink between intervals X and Y is rewritten as one or two
//! constraints over the interval end points `s_x, e_x, s_y, e_y`, using only
//! `<` and `=` (a `>` is expressed by swapping operands):
//!
//! | TLink          | constraints              |
//! |----------------|--------------------------|
//! | X BEFORE Y     | `e_x < s_y`              |
//! | X IBEFORE Y    | `e_x = s_y`              |
//! | X BEGINS Y     | `s_x = s_y`, `e_x < e_y` |
//! | X ENDS Y       | `e_x = e_y`, `s_y < s_x` |
//! | X IS_INCLUDED Y| `s_y < s_x`, `e_x < e_y` |
//! | X SIMULTANEOUS Y | `s_x = s_y`, `e_x = e_y` |
//!
//! The remaining types are the inverses of the rows above. Allen's
//! *overlaps* has no TimeML link and is rejected on input.

mod closure;

pub use closure::{check_consistency, is_consistent, point_closure, ClosureMatrix, Consistency, PointRelation};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The closed set of TimeML relation types used throughout the crate.
///
/// `DURING`, `DURING_INV` and `IDENTITY` are accepted on input and folded
/// into [`TLinkType::Simultaneous`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TLinkType {
    Before,
    After,
    IBefore,
    IAfter,
    Begins,
    BegunBy,
    Ends,
    EndedBy,
    IsIncluded,
    Includes,
    Simultaneous,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{found:?} is not a supported TLink relation{detail}; accepted labels: {accepted}")]
pub struct UnknownRelation {
    pub found: String,
    detail: &'static str,
    accepted: String,
}

impl TLinkType {
    /// Canonical order. Fixes iteration everywhere a deterministic order over
    /// relation types matters (tie-breaking, entailment checks, reports).
    pub const ALL: [TLinkType; 11] = [
        TLinkType::Before,
        TLinkType::After,
        TLinkType::IBefore,
        TLinkType::IAfter,
        TLinkType::Begins,
        TLinkType::BegunBy,
        TLinkType::Ends,
        TLinkType::EndedBy,
        TLinkType::IsIncluded,
        TLinkType::Includes,
        TLinkType::Simultaneous,
    ];

    /// Uppercase wire label.
    pub fn label(self) -> &'static str {
        match self {
            TLinkType::Before => "BEFORE",
            TLinkType::After => "AFTER",
            TLinkType::IBefore => "IBEFORE",
            TLinkType::IAfter => "IAFTER",
            TLinkType::Begins => "BEGINS",
            TLinkType::BegunBy => "BEGUN_BY",
            TLinkType::Ends => "ENDS",
            TLinkType::EndedBy => "ENDED_BY",
            TLinkType::IsIncluded => "IS_INCLUDED",
            TLinkType::Includes => "INCLUDES",
            TLinkType::Simultaneous => "SIMULTANEOUS",
        }
    }

    /// Short label used in confusion-matrix headers.
    pub fn abbrev(self) -> &'static str {
        match self {
            TLinkType::Before => "B",
            TLinkType::After => "A",
            TLinkType::IBefore => "IB",
            TLinkType::IAfter => "IA",
            TLinkType::Begins => "BS",
            TLinkType::BegunBy => "BB",
            TLinkType::Ends => "E",
            TLinkType::EndedBy => "EB",
            TLinkType::IsIncluded => "II",
            TLinkType::Includes => "I",
            TLinkType::Simultaneous => "S",
        }
    }

    /// Position in [`TLinkType::ALL`].
    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn invert(self) -> TLinkType {
        match self {
            TLinkType::Before => TLinkType::After,
            TLinkType::After => TLinkType::Before,
            TLinkType::IBefore => TLinkType::IAfter,
            TLinkType::IAfter => TLinkType::IBefore,
            TLinkType::Begins => TLinkType::BegunBy,
            TLinkType::BegunBy => TLinkType::Begins,
            TLinkType::Ends => TLinkType::EndedBy,
            TLinkType::EndedBy => TLinkType::Ends,
            TLinkType::IsIncluded => TLinkType::Includes,
            TLinkType::Includes => TLinkType::IsIncluded,
            TLinkType::Simultaneous => TLinkType::Simultaneous,
        }
    }

    /// Parses a TimeML `relType`, applying the load-time normalizations.
    pub fn parse(label: &str) -> Result<TLinkType, UnknownRelation> {
        let norm = label.trim().to_ascii_uppercase();
        let found = match norm.as_str() {
            "BEFORE" => TLinkType::Before,
            "AFTER" => TLinkType::After,
            "IBEFORE" => TLinkType::IBefore,
            "IAFTER" => TLinkType::IAfter,
            "BEGINS" => TLinkType::Begins,
            "BEGUN_BY" => TLinkType::BegunBy,
            "ENDS" => TLinkType::Ends,
            "ENDED_BY" => TLinkType::EndedBy,
            "IS_INCLUDED" => TLinkType::IsIncluded,
            "INCLUDES" => TLinkType::Includes,
            "SIMULTANEOUS" | "DURING" | "DURING_INV" | "IDENTITY" => TLinkType::Simultaneous,
            _ => {
                let detail = if norm.starts_with("OVERLAP") {
                    " (Allen's overlap has no TimeML TLink)"
                } else {
                    ""
                };
                return Err(UnknownRelation {
                    found: label.to_string(),
                    detail,
                    accepted: TLinkType::ALL.iter().map(|r| r.label()).collect::<Vec<_>>().join(", "),
                });
            }
        };
        Ok(found)
    }
}

impl fmt::Display for TLinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TLinkType {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TLinkType::parse(s)
    }
}

impl Serialize for TLinkType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for TLinkType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        TLinkType::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Start,
    End,
}

/// One end point of an entity's interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointRef<K> {
    pub entity: K,
    pub side: Side,
}

impl<K> PointRef<K> {
    pub fn start(entity: K) -> Self {
        PointRef { entity, side: Side::Start }
    }

    pub fn end(entity: K) -> Self {
        PointRef { entity, side: Side::End }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointOp {
    Less,
    Equal,
}

/// `lhs op rhs` over two end points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointConstraint<K> {
    pub lhs: PointRef<K>,
    pub op: PointOp,
    pub rhs: PointRef<K>,
}

impl<K: Ord> PointConstraint<K> {
    /// Orders the operands of an equality so that `a = b` and `b = a`
    /// compare equal.
    pub fn normalized(self) -> Self {
        if self.op == PointOp::Equal && self.rhs < self.lhs {
            PointConstraint { lhs: self.rhs, op: self.op, rhs: self.lhs }
        } else {
            self
        }
    }
}

fn less<K>(lhs: PointRef<K>, rhs: PointRef<K>) -> PointConstraint<K> {
    PointConstraint { lhs, op: PointOp::Less, rhs }
}

fn equal<K>(lhs: PointRef<K>, rhs: PointRef<K>) -> PointConstraint<K> {
    PointConstraint { lhs, op: PointOp::Equal, rhs }
}

/// Point-algebra reading of `x r y`.
pub fn interpret<K: Clone>(r: TLinkType, x: K, y: K) -> Vec<PointConstraint<K>> {
    use TLinkType::*;
    match r {
        Before => vec![less(PointRef::end(x), PointRef::start(y))],
        IBefore => vec![equal(PointRef::end(x), PointRef::start(y))],
        Begins => vec![
            equal(PointRef::start(x.clone()), PointRef::start(y.clone())),
            less(PointRef::end(x), PointRef::end(y)),
        ],
        Ends => vec![
            equal(PointRef::end(x.clone()), PointRef::end(y.clone())),
            less(PointRef::start(y), PointRef::start(x)),
        ],
        IsIncluded => vec![
            less(PointRef::start(y.clone()), PointRef::start(x.clone())),
            less(PointRef::end(x), PointRef::end(y)),
        ],
        Simultaneous => vec![
            equal(PointRef::start(x.clone()), PointRef::start(y.clone())),
            equal(PointRef::end(x), PointRef::end(y)),
        ],
        After | IAfter | BegunBy | EndedBy | Includes => interpret(r.invert(), y, x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(cs: Vec<PointConstraint<&'static str>>) -> BTreeSet<PointConstraint<&'static str>> {
        cs.into_iter().map(PointConstraint::normalized).collect()
    }

    fn lt(a: PointRef<&'static str>, b: PointRef<&'static str>) -> PointConstraint<&'static str> {
        less(a, b)
    }

    fn eq(a: PointRef<&'static str>, b: PointRef<&'static str>) -> PointConstraint<&'static str> {
        equal(a, b)
    }

    fn s(e: &'static str) -> PointRef<&'static str> {
        PointRef::start(e)
    }

    fn e(x: &'static str) -> PointRef<&'static str> {
        PointRef::end(x)
    }

    #[test]
    fn table_rows_for_all_directed_forms() {
        use TLinkType::*;
        let expected: Vec<(TLinkType, Vec<PointConstraint<&'static str>>)> = vec![
            (Before, vec![lt(e("x"), s("y"))]),
            (After, vec![lt(e("y"), s("x"))]),
            (IBefore, vec![eq(e("x"), s("y"))]),
            (IAfter, vec![eq(e("y"), s("x"))]),
            (Begins, vec![eq(s("x"), s("y")), lt(e("x"), e("y"))]),
            (BegunBy, vec![eq(s("y"), s("x")), lt(e("y"), e("x"))]),
            (Ends, vec![eq(e("x"), e("y")), lt(s("y"), s("x"))]),
            (EndedBy, vec![eq(e("y"), e("x")), lt(s("x"), s("y"))]),
            (IsIncluded, vec![lt(s("y"), s("x")), lt(e("x"), e("y"))]),
            (Includes, vec![lt(s("x"), s("y")), lt(e("y"), e("x"))]),
            (Simultaneous, vec![eq(s("x"), s("y")), eq(e("x"), e("y"))]),
        ];
        for (r, cs) in expected {
            let got = interpret(r, "x", "y");
            let want_len = if matches!(r, Before | After | IBefore | IAfter) { 1 } else { 2 };
            assert_eq!(got.len(), want_len, "{r}");
            assert_eq!(set(got), set(cs), "{r}");
        }
    }

    #[test]
    fn inverse_is_involution_and_respected_by_interpret() {
        for r in TLinkType::ALL {
            assert_eq!(r.invert().invert(), r);
            assert_eq!(set(interpret(r, "x", "y")), set(interpret(r.invert(), "y", "x")));
        }
        assert_eq!(TLinkType::Before.invert(), TLinkType::After);
        assert_eq!(TLinkType::Includes.invert(), TLinkType::IsIncluded);
        assert_eq!(TLinkType::Simultaneous.invert(), TLinkType::Simultaneous);
    }

    #[test]
    fn parse_normalizes_during_and_rejects_overlap() {
        assert_eq!(TLinkType::parse("DURING").unwrap(), TLinkType::Simultaneous);
        assert_eq!(TLinkType::parse("during_inv").unwrap(), TLinkType::Simultaneous);
        assert_eq!(TLinkType::parse("IDENTITY").unwrap(), TLinkType::Simultaneous);
        let err = TLinkType::parse("OVERLAP").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("overlap"), "{msg}");
        assert!(msg.contains("IS_INCLUDED"), "{msg}");
        for r in TLinkType::ALL {
            assert_eq!(TLinkType::parse(r.label()).unwrap(), r);
            assert_eq!(TLinkType::ALL[r.ordinal()], r);
        }
    }
}
