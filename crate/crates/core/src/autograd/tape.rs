use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::store::{ParamGrads, ParamId, ParamStore};
use super::Scalar;

#[derive(Debug, Clone, Copy)]
enum Op {
    Input,
    Param(ParamId),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Neg(usize),
    AddConst(usize),
    Scale(usize, f64),
    Max(usize, usize),
    MaxConst(usize, f64),
    Abs(usize),
    Exp(usize),
    Log(usize),
    Tanh(usize),
    Sigmoid(usize),
    Dot(usize, usize),
    Sum(usize),
    /// `w · x (+ b)` with `w` row-major `len(out) × len(x)`.
    Affine { w: usize, x: usize, b: Option<usize> },
    Slice { src: usize, start: usize },
    /// Inputs are `concat_args[first..first + count]`.
    Concat { first: usize, count: usize },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    op: Op,
    offset: usize,
    len: usize,
}

#[derive(Default)]
struct Inner {
    nodes: Vec<Node>,
    values: Vec<f64>,
    concat_args: Vec<usize>,
}

impl Inner {
    fn range(&self, id: usize) -> std::ops::Range<usize> {
        let n = &self.nodes[id];
        n.offset..n.offset + n.len
    }

    fn len_of(&self, id: usize) -> usize {
        self.nodes[id].len
    }
}

/// Read access to everything recorded before the node being pushed.
struct View<'a> {
    nodes: &'a [Node],
    values: &'a [f64],
    concat_args: &'a [usize],
}

impl View<'_> {
    fn range(&self, id: usize) -> std::ops::Range<usize> {
        let n = &self.nodes[id];
        n.offset..n.offset + n.len
    }
}

/// Append-only record of vector operations.
///
/// Nodes are stored in creation order and every node's inputs precede it,
/// so the graph is acyclic by construction and the backward pass is one
/// reverse sweep. All values live in one flat arena; clearing the tape keeps
/// its capacity for the next mini-batch.
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// Handle to a tape node (a vector; scalars have length 1).
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var#{}{:?}", self.id, self.values())
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    /// Drops all nodes, keeping allocations.
    pub fn clear(&mut self) {
        let inner = self.inner.get_mut();
        inner.nodes.clear();
        inner.values.clear();
        inner.concat_args.clear();
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op, len: usize, fill: impl FnOnce(&View<'_>, &mut [f64])) -> Var<'_> {
        let mut guard = self.inner.borrow_mut();
        let inner = &mut *guard;
        let offset = inner.values.len();
        inner.values.resize(offset + len, 0.0);
        let (before, out) = inner.values.split_at_mut(offset);
        let view = View { nodes: &inner.nodes, values: before, concat_args: &inner.concat_args };
        fill(&view, out);
        let id = inner.nodes.len();
        inner.nodes.push(Node { op, offset, len });
        Var { tape: self, id }
    }

    fn unary(&self, a: usize, op: Op, f: impl Fn(f64) -> f64) -> Var<'_> {
        let len = self.inner.borrow().len_of(a);
        self.push(op, len, |inner, out| {
            for (o, &x) in out.iter_mut().zip(&inner.values[inner.range(a)]) {
                *o = f(x);
            }
        })
    }

    fn binary(&self, a: usize, b: usize, op: Op, f: impl Fn(f64, f64) -> f64) -> Var<'_> {
        let (la, lb) = {
            let inner = self.inner.borrow();
            (inner.len_of(a), inner.len_of(b))
        };
        assert_eq!(la, lb, "elementwise op on vectors of length {la} and {lb}");
        self.push(op, la, |inner, out| {
            let (xa, xb) = (&inner.values[inner.range(a)], &inner.values[inner.range(b)]);
            for ((o, &x), &y) in out.iter_mut().zip(xa).zip(xb) {
                *o = f(x, y);
            }
        })
    }

    /// A constant (or free input) vector.
    pub fn input(&self, values: &[f64]) -> Var<'_> {
        self.push(Op::Input, values.len(), |_, out| out.copy_from_slice(values))
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.input(&[value])
    }

    /// A leaf holding the current value of a stored tensor (flattened
    /// row-major). Its gradient is reported under `id`.
    pub fn param(&self, store: &ParamStore, id: ParamId) -> Var<'_> {
        let data = &store.tensor(id).data;
        self.push(Op::Param(id), data.len(), |_, out| out.copy_from_slice(data))
    }

    pub fn concat(&self, parts: &[Var<'_>]) -> Var<'_> {
        let (len, first) = {
            let mut inner = self.inner.borrow_mut();
            let first = inner.concat_args.len();
            for p in parts {
                inner.concat_args.push(p.id);
            }
            (parts.iter().map(|p| inner.len_of(p.id)).sum(), first)
        };
        self.push(Op::Concat { first, count: parts.len() }, len, |inner, out| {
            let mut at = 0;
            for &p in &inner.concat_args[first..first + parts.len()] {
                let src = &inner.values[inner.range(p)];
                out[at..at + src.len()].copy_from_slice(src);
                at += src.len();
            }
        })
    }

    /// `w · x + b` for a row-major weight vector `w` of `rows × len(x)`.
    pub fn affine<'t>(&'t self, w: Var<'t>, x: Var<'t>, b: Option<Var<'t>>, rows: usize) -> Var<'t> {
        let (cols, wl, bl) = {
            let inner = self.inner.borrow();
            (inner.len_of(x.id), inner.len_of(w.id), b.map(|b| inner.len_of(b.id)))
        };
        assert_eq!(wl, rows * cols, "affine weight has {wl} entries, expected {rows}x{cols}");
        if let Some(bl) = bl {
            assert_eq!(bl, rows, "affine bias length {bl}, expected {rows}");
        }
        self.push(Op::Affine { w: w.id, x: x.id, b: b.map(|b| b.id) }, rows, |inner, out| {
            let wv = &inner.values[inner.range(w.id)];
            let xv = &inner.values[inner.range(x.id)];
            for (r, o) in out.iter_mut().enumerate() {
                let row = &wv[r * cols..(r + 1) * cols];
                *o = row.iter().zip(xv).map(|(a, b)| a * b).sum();
            }
            if let Some(b) = b {
                for (o, &bv) in out.iter_mut().zip(&inner.values[inner.range(b.id)]) {
                    *o += bv;
                }
            }
        })
    }

    /// Reverse sweep from a scalar root.
    ///
    /// # Panics
    /// If `root` is not scalar-valued or belongs to another tape.
    pub fn backward(&self, root: Var<'_>) -> Gradients {
        assert!(std::ptr::eq(self, root.tape), "root belongs to another tape");
        let inner = self.inner.borrow();
        assert_eq!(inner.len_of(root.id), 1, "backward needs a scalar root");
        let vals = &inner.values;
        let mut grads = vec![0.0; vals.len()];
        grads[inner.nodes[root.id].offset] = 1.0;

        for id in (0..=root.id).rev() {
            let node = inner.nodes[id];
            let (lower, upper) = grads.split_at_mut(node.offset);
            let g = &upper[..node.len];
            if g.iter().all(|&x| x == 0.0) {
                continue;
            }
            let out = &vals[node.offset..node.offset + node.len];
            let r = |i: usize| inner.range(i);
            match node.op {
                Op::Input | Op::Param(_) => {}
                Op::Add(a, b) => {
                    axpy(&mut lower[r(a)], g, 1.0);
                    axpy(&mut lower[r(b)], g, 1.0);
                }
                Op::Sub(a, b) => {
                    axpy(&mut lower[r(a)], g, 1.0);
                    axpy(&mut lower[r(b)], g, -1.0);
                }
                Op::Mul(a, b) => {
                    let (ra, rb) = (r(a), r(b));
                    for k in 0..node.len {
                        lower[ra.start + k] += g[k] * vals[rb.start + k];
                        lower[rb.start + k] += g[k] * vals[ra.start + k];
                    }
                }
                Op::Neg(a) => axpy(&mut lower[r(a)], g, -1.0),
                Op::AddConst(a) => axpy(&mut lower[r(a)], g, 1.0),
                Op::Scale(a, c) => axpy(&mut lower[r(a)], g, c),
                Op::Max(a, b) => {
                    let (ra, rb) = (r(a), r(b));
                    for k in 0..node.len {
                        if vals[ra.start + k] >= vals[rb.start + k] {
                            lower[ra.start + k] += g[k];
                        } else {
                            lower[rb.start + k] += g[k];
                        }
                    }
                }
                Op::MaxConst(a, c) => {
                    let ra = r(a);
                    for k in 0..node.len {
                        if vals[ra.start + k] >= c {
                            lower[ra.start + k] += g[k];
                        }
                    }
                }
                Op::Abs(a) => {
                    let ra = r(a);
                    for k in 0..node.len {
                        let s = if vals[ra.start + k] >= 0.0 { 1.0 } else { -1.0 };
                        lower[ra.start + k] += s * g[k];
                    }
                }
                Op::Exp(a) => {
                    let ra = r(a);
                    for k in 0..node.len {
                        lower[ra.start + k] += g[k] * out[k];
                    }
                }
                Op::Log(a) => {
                    let ra = r(a);
                    for k in 0..node.len {
                        lower[ra.start + k] += g[k] / vals[ra.start + k];
                    }
                }
                Op::Tanh(a) => {
                    let ra = r(a);
                    for k in 0..node.len {
                        lower[ra.start + k] += g[k] * (1.0 - out[k] * out[k]);
                    }
                }
                Op::Sigmoid(a) => {
                    let ra = r(a);
                    for k in 0..node.len {
                        lower[ra.start + k] += g[k] * out[k] * (1.0 - out[k]);
                    }
                }
                Op::Dot(a, b) => {
                    let (ra, rb) = (r(a), r(b));
                    for k in 0..ra.len() {
                        lower[ra.start + k] += g[0] * vals[rb.start + k];
                        lower[rb.start + k] += g[0] * vals[ra.start + k];
                    }
                }
                Op::Sum(a) => {
                    for x in &mut lower[r(a)] {
                        *x += g[0];
                    }
                }
                Op::Affine { w, x, b } => {
                    let (rw, rx) = (r(w), r(x));
                    let cols = rx.len();
                    for (row, &gr) in g.iter().enumerate() {
                        if gr == 0.0 {
                            continue;
                        }
                        let wrow = rw.start + row * cols;
                        for c in 0..cols {
                            lower[wrow + c] += gr * vals[rx.start + c];
                            lower[rx.start + c] += gr * vals[wrow + c];
                        }
                    }
                    if let Some(b) = b {
                        axpy(&mut lower[r(b)], g, 1.0);
                    }
                }
                Op::Slice { src, start } => {
                    let rs = r(src);
                    axpy(&mut lower[rs.start + start..rs.start + start + node.len], g, 1.0);
                }
                Op::Concat { first, count } => {
                    let mut at = 0;
                    for &p in &inner.concat_args[first..first + count] {
                        let rp = r(p);
                        let n = rp.len();
                        axpy(&mut lower[rp], &g[at..at + n], 1.0);
                        at += n;
                    }
                }
            }
        }

        let ranges = inner.nodes.iter().map(|n| (n.offset, n.len)).collect();
        let params = inner
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.op {
                Op::Param(p) => Some((p, i)),
                _ => None,
            })
            .collect();
        Gradients { grads, ranges, params }
    }

    /// Signed distance to the kink of every `max`/`abs` element on the tape,
    /// in node order. Used to keep finite differences away from kinks.
    pub fn kink_margins(&self) -> Vec<f64> {
        let inner = self.inner.borrow();
        let v = &inner.values;
        let mut out = Vec::new();
        for node in &inner.nodes {
            match node.op {
                Op::Max(a, b) => {
                    let (ra, rb) = (inner.range(a), inner.range(b));
                    out.extend((0..node.len).map(|k| v[ra.start + k] - v[rb.start + k]));
                }
                Op::MaxConst(a, c) => out.extend(v[inner.range(a)].iter().map(|x| x - c)),
                Op::Abs(a) => out.extend_from_slice(&v[inner.range(a)]),
                _ => {}
            }
        }
        out
    }
}

fn axpy(dst: &mut [f64], src: &[f64], alpha: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

/// Result of [`Tape::backward`].
pub struct Gradients {
    grads: Vec<f64>,
    ranges: Vec<(usize, usize)>,
    params: Vec<(ParamId, usize)>,
}

impl Gradients {
    /// Gradient of the root with respect to any node.
    pub fn wrt(&self, v: Var<'_>) -> &[f64] {
        let (offset, len) = self.ranges[v.id];
        &self.grads[offset..offset + len]
    }

    /// Gradients of stored parameters, summed over every leaf of each.
    pub fn param_grads(&self, store: &ParamStore) -> ParamGrads {
        let mut out = ParamGrads::zeros(store);
        self.accumulate_into(&mut out);
        out
    }

    pub fn accumulate_into(&self, out: &mut ParamGrads) {
        for &(p, node) in &self.params {
            let (offset, len) = self.ranges[node];
            for (d, s) in out.get_mut(p).iter_mut().zip(&self.grads[offset..offset + len]) {
                *d += s;
            }
        }
    }
}

impl<'t> Var<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn len(&self) -> usize {
        self.tape.inner.borrow().len_of(self.id)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        let inner = self.tape.inner.borrow();
        inner.values[inner.range(self.id)].to_vec()
    }

    /// Value of a scalar node.
    pub fn item(&self) -> f64 {
        let inner = self.tape.inner.borrow();
        assert_eq!(inner.len_of(self.id), 1, "item() on a vector");
        inner.values[inner.nodes[self.id].offset]
    }

    pub fn tanh(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Tanh(self.id), f64::tanh)
    }

    pub fn sigmoid(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Sigmoid(self.id), |x| 1.0 / (1.0 + (-x).exp()))
    }

    pub fn dot(self, other: Var<'t>) -> Var<'t> {
        let (la, lb) = (self.len(), other.len());
        assert_eq!(la, lb, "dot of lengths {la} and {lb}");
        let (a, b) = (self.id, other.id);
        self.tape.push(Op::Dot(a, b), 1, |inner, out| {
            out[0] = inner.values[inner.range(a)].iter().zip(&inner.values[inner.range(b)]).map(|(x, y)| x * y).sum();
        })
    }

    pub fn sum(self) -> Var<'t> {
        let a = self.id;
        self.tape.push(Op::Sum(a), 1, |inner, out| out[0] = inner.values[inner.range(a)].iter().sum())
    }

    pub fn slice(self, start: usize, len: usize) -> Var<'t> {
        let src = self.id;
        assert!(start + len <= self.len(), "slice {start}+{len} out of range {}", self.len());
        self.tape.push(Op::Slice { src, start }, len, |inner, out| {
            let r = inner.range(src);
            out.copy_from_slice(&inner.values[r.start + start..r.start + start + len]);
        })
    }

    pub fn index(self, i: usize) -> Var<'t> {
        self.slice(i, 1)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.binary(self.id, rhs.id, Op::Add(self.id, rhs.id), |a, b| a + b)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.binary(self.id, rhs.id, Op::Sub(self.id, rhs.id), |a, b| a - b)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.binary(self.id, rhs.id, Op::Mul(self.id, rhs.id), |a, b| a * b)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Neg(self.id), |a| -a)
    }
}

impl<'t> Scalar for Var<'t> {
    fn lift(&self, c: f64) -> Self {
        self.tape.scalar(c)
    }

    fn add_const(self, c: f64) -> Self {
        self.tape.unary(self.id, Op::AddConst(self.id), |a| a + c)
    }

    fn scale(self, c: f64) -> Self {
        self.tape.unary(self.id, Op::Scale(self.id, c), |a| a * c)
    }

    fn max(self, other: Self) -> Self {
        self.tape.binary(self.id, other.id, Op::Max(self.id, other.id), |a, b| if a >= b { a } else { b })
    }

    fn max_const(self, c: f64) -> Self {
        self.tape.unary(self.id, Op::MaxConst(self.id, c), |a| if a >= c { a } else { c })
    }

    fn abs(self) -> Self {
        self.tape.unary(self.id, Op::Abs(self.id), f64::abs)
    }

    fn exp(self) -> Self {
        self.tape.unary(self.id, Op::Exp(self.id), f64::exp)
    }

    fn ln(self) -> Self {
        self.tape.unary(self.id, Op::Log(self.id), f64::ln)
    }

    fn value(&self) -> f64 {
        self.item()
    }

    fn add_span(self, span: Self) -> Self {
        self.tape.binary(self.id, span.id, Op::Add(self.id, span.id), super::add_span)
    }
}
