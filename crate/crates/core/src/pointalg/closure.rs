use std::collections::HashMap;
use std::hash::Hash;

use super::{interpret, PointConstraint, PointOp, PointRef, TLinkType};
use crate::corpus::TLink;

/// Entailed relation between two points after closure.
///
/// Only `<` and `=` constraints are ever fed in, so `LessEq`/`GreaterEq`
/// cannot arise from TLinks; they are kept so the matrix is total over the
/// point-algebra relation lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointRelation {
    Less,
    Equal,
    Greater,
    LessEq,
    GreaterEq,
    Unknown,
    Inconsistent,
}

/// Closed point-relation matrix over the start/end points of a set of
/// entities.
///
/// Equalities are collapsed with union-find, strict orderings become edges
/// between the resulting classes and the transitive closure of those edges
/// is kept as one bitset row per class. A class that reaches itself lies on
/// a strict cycle; every cell touching it reads `Inconsistent`.
#[derive(Debug, Clone)]
pub struct ClosureMatrix<K> {
    points: Vec<PointRef<K>>,
    index: HashMap<PointRef<K>, usize>,
    class_of: Vec<usize>,
    reach: Vec<Vec<u64>>,
    cyclic: Vec<bool>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

fn has(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

/// Closes `constraints` over `points`.
///
/// Both end points of every entity mentioned (in `points` or in a
/// constraint) take part, and `s_i < e_i` is seeded for each such entity.
pub fn point_closure<K>(constraints: &[PointConstraint<K>], points: &[PointRef<K>]) -> ClosureMatrix<K>
where
    K: Clone + Eq + Hash,
{
    let mut entities: Vec<K> = Vec::new();
    let mut seen: HashMap<K, ()> = HashMap::new();
    let mentioned = points
        .iter()
        .map(|p| &p.entity)
        .chain(constraints.iter().flat_map(|c| [&c.lhs.entity, &c.rhs.entity]));
    for e in mentioned {
        if seen.insert(e.clone(), ()).is_none() {
            entities.push(e.clone());
        }
    }
    ClosureMatrix::build(entities, constraints)
}

impl<K: Clone + Eq + Hash> ClosureMatrix<K> {
    /// Closure over the given entities (each contributes a start and an end
    /// point) under `constraints`. Entities mentioned only in constraints are
    /// added.
    pub fn build(entities: impl IntoIterator<Item = K>, constraints: &[PointConstraint<K>]) -> Self {
        let mut points = Vec::new();
        let mut index = HashMap::new();
        let add_entity = |e: &K, points: &mut Vec<PointRef<K>>, index: &mut HashMap<PointRef<K>, usize>| {
            let s = PointRef::start(e.clone());
            if !index.contains_key(&s) {
                index.insert(s.clone(), points.len());
                points.push(s);
                let end = PointRef::end(e.clone());
                index.insert(end.clone(), points.len());
                points.push(end);
            }
        };
        for e in entities {
            add_entity(&e, &mut points, &mut index);
        }
        for c in constraints {
            add_entity(&c.lhs.entity, &mut points, &mut index);
            add_entity(&c.rhs.entity, &mut points, &mut index);
        }

        let n = points.len();
        let mut uf = UnionFind((0..n).collect());
        for c in constraints.iter().filter(|c| c.op == PointOp::Equal) {
            uf.union(index[&c.lhs], index[&c.rhs]);
        }
        let mut class_id = vec![usize::MAX; n];
        let mut class_of = vec![0; n];
        let mut classes = 0;
        for p in 0..n {
            let root = uf.find(p);
            if class_id[root] == usize::MAX {
                class_id[root] = classes;
                classes += 1;
            }
            class_of[p] = class_id[root];
        }

        let words = classes.div_ceil(64).max(1);
        let mut reach = vec![vec![0u64; words]; classes];
        // Start precedes end for every entity (durations are clamped positive).
        for p in (0..n).step_by(2) {
            set(&mut reach[class_of[p]], class_of[p + 1]);
        }
        for c in constraints.iter().filter(|c| c.op == PointOp::Less) {
            let (a, b) = (class_of[index[&c.lhs]], class_of[index[&c.rhs]]);
            set(&mut reach[a], b);
        }
        for k in 0..classes {
            let row_k = reach[k].clone();
            for row in reach.iter_mut() {
                if has(row, k) {
                    for (w, rk) in row.iter_mut().zip(&row_k) {
                        *w |= rk;
                    }
                }
            }
        }
        let cyclic = (0..classes).map(|c| has(&reach[c], c)).collect();
        ClosureMatrix { points, index, class_of, reach, cyclic }
    }

    pub fn points(&self) -> &[PointRef<K>] {
        &self.points
    }

    fn relation_idx(&self, a: usize, b: usize) -> PointRelation {
        let (ca, cb) = (self.class_of[a], self.class_of[b]);
        if self.cyclic[ca] || self.cyclic[cb] {
            return PointRelation::Inconsistent;
        }
        if ca == cb {
            return PointRelation::Equal;
        }
        match (has(&self.reach[ca], cb), has(&self.reach[cb], ca)) {
            (true, true) => PointRelation::Inconsistent,
            (true, false) => PointRelation::Less,
            (false, true) => PointRelation::Greater,
            (false, false) => PointRelation::Unknown,
        }
    }

    /// Relation between two points; `Unknown` if either point is absent.
    pub fn relation(&self, a: &PointRef<K>, b: &PointRef<K>) -> PointRelation {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.relation_idx(i, j),
            _ => PointRelation::Unknown,
        }
    }

    /// Full matrix in [`ClosureMatrix::points`] order.
    pub fn cells(&self) -> Vec<Vec<PointRelation>> {
        let n = self.points.len();
        (0..n).map(|i| (0..n).map(|j| self.relation_idx(i, j)).collect()).collect()
    }

    pub fn is_consistent(&self) -> bool {
        !self.cyclic.iter().any(|&c| c)
    }

    pub fn entails(&self, c: &PointConstraint<K>) -> bool {
        let rel = self.relation(&c.lhs, &c.rhs);
        match c.op {
            PointOp::Less => rel == PointRelation::Less,
            PointOp::Equal => rel == PointRelation::Equal,
        }
    }

    /// Whether every constraint of `x r y` is entailed.
    pub fn entails_tlink(&self, r: TLinkType, x: &K, y: &K) -> bool {
        interpret(r, x.clone(), y.clone()).iter().all(|c| self.entails(c))
    }

    /// The TLink type whose whole point reading is entailed for `(x, y)`,
    /// scanning in canonical order. Configurations without a TimeML name
    /// (e.g. Allen overlap) and unknown pairs give `None`.
    pub fn entailed_tlink(&self, x: &K, y: &K) -> Option<TLinkType> {
        TLinkType::ALL.into_iter().find(|&r| self.entails_tlink(r, x, y))
    }

    /// Every `<`/`=` fact in the matrix, as constraints. Closing these again
    /// reproduces the matrix.
    pub fn entailed_constraints(&self) -> Vec<PointConstraint<K>> {
        let n = self.points.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let op = match self.relation_idx(i, j) {
                    PointRelation::Less => PointOp::Less,
                    PointRelation::Equal if i < j => PointOp::Equal,
                    _ => continue,
                };
                out.push(PointConstraint { lhs: self.points[i].clone(), op, rhs: self.points[j].clone() });
            }
        }
        out
    }
}

impl ClosureMatrix<String> {
    /// Closure of a TLink set over the given entity universe plus every
    /// TLink endpoint.
    pub fn from_tlinks<'a>(entities: impl IntoIterator<Item = &'a str>, links: impl IntoIterator<Item = &'a TLink>) -> Self {
        let constraints: Vec<PointConstraint<String>> = links
            .into_iter()
            .flat_map(|l| interpret(l.relation, l.source.clone(), l.target.clone()))
            .collect();
        ClosureMatrix::build(entities.into_iter().map(str::to_string), &constraints)
    }

    pub fn entailed_tlink_ids(&self, x: &str, y: &str) -> Option<TLinkType> {
        self.entailed_tlink(&x.to_string(), &y.to_string())
    }
}

/// Outcome of [`check_consistency`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    /// Indices `(i, j)`, `i <= j`, of the first conflicting pair: `j` is the
    /// shortest inconsistent prefix end and `i` the earliest link that,
    /// together with link `j` and the links before `i`, is inconsistent.
    Conflict(usize, usize),
}

fn consistent_subset(links: &[&TLink]) -> bool {
    ClosureMatrix::from_tlinks(std::iter::empty(), links.iter().copied()).is_consistent()
}

// Smallest k in lo..hi with pred(k) true, given pred monotone and pred(hi-1).
fn first_true(lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (lo, hi - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Consistency of a document-level TLink set under point closure, with the
/// first conflicting pair on failure.
pub fn check_consistency(links: &[TLink]) -> Consistency {
    let all: Vec<&TLink> = links.iter().collect();
    if consistent_subset(&all) {
        return Consistency::Consistent;
    }
    // Inconsistency is monotone in the set, so both searches can bisect.
    let j = first_true(0, all.len(), |k| !consistent_subset(&all[..=k]));
    let i = first_true(0, j + 1, |k| {
        let mut subset: Vec<&TLink> = all[..k].to_vec();
        subset.push(all[k]);
        if k != j {
            subset.push(all[j]);
        }
        !consistent_subset(&subset)
    });
    Consistency::Conflict(i, j)
}

pub fn is_consistent(links: &[TLink]) -> bool {
    check_consistency(links) == Consistency::Consistent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointalg::TLinkType::*;

    fn link(a: &str, r: TLinkType, b: &str) -> TLink {
        TLink::new(a, b, r)
    }

    fn c(a: PointRef<&'static str>, op: PointOp, b: PointRef<&'static str>) -> PointConstraint<&'static str> {
        PointConstraint { lhs: a, op, rhs: b }
    }

    #[test]
    fn transitivity_and_substitution() {
        let (a, b, cc) = (PointRef::start("a"), PointRef::start("b"), PointRef::start("c"));
        let m = point_closure(&[c(a.clone(), PointOp::Less, b.clone()), c(b.clone(), PointOp::Less, cc.clone())], &[]);
        assert_eq!(m.relation(&a, &cc), PointRelation::Less);
        assert_eq!(m.relation(&cc, &a), PointRelation::Greater);

        let m = point_closure(&[c(a.clone(), PointOp::Equal, b.clone()), c(b.clone(), PointOp::Less, cc.clone())], &[]);
        assert_eq!(m.relation(&a, &cc), PointRelation::Less);
        assert_eq!(m.relation(&a, &b), PointRelation::Equal);

        let m = point_closure(&[c(a.clone(), PointOp::Less, b.clone()), c(b.clone(), PointOp::Less, a.clone())], &[]);
        assert_eq!(m.relation(&a, &b), PointRelation::Inconsistent);
        assert!(!m.is_consistent());
    }

    /// Brute force: enumerate all weak orderings of three points and keep
    /// those satisfying the constraints; a relation is entailed iff it holds
    /// in every model.
    #[test]
    fn equal_then_less_matches_enumeration() {
        let names = ["a", "b", "c"];
        let mut models = Vec::new();
        for ra in 0..3 {
            for rb in 0..3 {
                for rc in 0..3 {
                    let rank = [ra, rb, rc];
                    if rank[0] == rank[1] && rank[1] < rank[2] {
                        models.push(rank);
                    }
                }
            }
        }
        assert!(!models.is_empty());
        let m = point_closure(
            &[
                c(PointRef::start("a"), PointOp::Equal, PointRef::start("b")),
                c(PointRef::start("b"), PointOp::Less, PointRef::start("c")),
            ],
            &[],
        );
        for i in 0..3 {
            for j in 0..3 {
                let all_less = models.iter().all(|r| r[i] < r[j]);
                let all_eq = models.iter().all(|r| r[i] == r[j]);
                let rel = m.relation(&PointRef::start(names[i]), &PointRef::start(names[j]));
                assert_eq!(rel == PointRelation::Less, all_less, "{i}{j}");
                assert_eq!(rel == PointRelation::Equal, all_eq, "{i}{j}");
            }
        }
    }

    #[test]
    fn seeds_start_before_end() {
        let m = point_closure::<&str>(&[], &[PointRef::start("x")]);
        assert_eq!(m.relation(&PointRef::start("x"), &PointRef::end("x")), PointRelation::Less);
    }

    #[test]
    fn consistency_examples() {
        assert!(is_consistent(&[link("A", Before, "B"), link("B", Before, "C"), link("A", Before, "C")]));
        assert_eq!(
            check_consistency(&[link("A", Before, "B"), link("B", Before, "A")]),
            Consistency::Conflict(0, 1)
        );
        assert!(!is_consistent(&[link("A", Includes, "B"), link("B", Includes, "A")]));
        assert_eq!(
            check_consistency(&[
                link("X", Before, "Y"),
                link("A", Before, "B"),
                link("C", Simultaneous, "D"),
                link("B", Before, "A"),
            ]),
            Consistency::Conflict(1, 3)
        );
        assert_eq!(check_consistency(&[link("A", Before, "A")]), Consistency::Conflict(0, 0));
        assert!(is_consistent(&[]));
    }

    #[test]
    fn entailed_tlink_examples() {
        let links = [link("A", Before, "B"), link("B", Before, "C")];
        let m = ClosureMatrix::from_tlinks(["A", "B", "C"], &links);
        assert_eq!(m.entailed_tlink_ids("A", "C"), Some(Before));
        assert_eq!(m.entailed_tlink_ids("C", "A"), Some(After));

        let m = ClosureMatrix::from_tlinks([], &[link("A", Begins, "B")]);
        assert_eq!(m.entailed_tlink_ids("B", "A"), Some(BegunBy));

        let m = ClosureMatrix::from_tlinks(["C"], &[link("A", Before, "B")]);
        assert_eq!(m.entailed_tlink_ids("B", "C"), None);
    }

    #[test]
    fn every_relation_recovered_on_two_fresh_entities() {
        for r in TLinkType::ALL {
            let m = ClosureMatrix::from_tlinks([], &[link("x", r, "y")]);
            assert!(m.is_consistent(), "{r}");
            assert_eq!(m.entailed_tlink_ids("x", "y"), Some(r));
            assert_eq!(m.entailed_tlink_ids("y", "x"), Some(r.invert()));
        }
    }

    #[test]
    fn closure_is_idempotent() {
        let links = [link("A", Before, "B"), link("B", Includes, "C"), link("C", Simultaneous, "D"), link("E", Ends, "B")];
        let m = ClosureMatrix::from_tlinks([], &links);
        let again = ClosureMatrix::build(m.points().iter().map(|p| p.entity.clone()), &m.entailed_constraints());
        assert_eq!(m.points(), again.points());
        assert_eq!(m.cells(), again.cells());
    }
}
