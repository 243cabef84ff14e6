//! Reverse-mode differentiation over a recorded tape of vector operations,
//! named parameter stores with Adam, and a finite-difference checker.
//!
//! The losses in [`crate::timeline`] are written once against the
//! [`Scalar`] trait and evaluated either on plain `f64` or on tape
//! [`Var`]s.

mod gradcheck;
mod store;
mod tape;

pub use gradcheck::{finite_diff_check, GradCheckReport};
pub use store::{AdamConfig, Checkpoint, ParamGrads, ParamId, ParamStore, StoreError, Tensor};
pub use tape::{Gradients, Tape, Var};

use std::ops::{Add, Mul, Neg, Sub};

/// A differentiable real number.
///
/// At kinks the subgradient goes to the first argument: `max(a, b)` with
/// `a == b` passes the gradient to `a`, `max_const(x, c)` with `x == c`
/// passes it to `x`, and `abs(0)` has derivative `+1`.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    /// A constant in the same evaluation context as `self`.
    fn lift(&self, c: f64) -> Self;
    fn add_const(self, c: f64) -> Self;
    fn scale(self, c: f64) -> Self;
    fn max(self, other: Self) -> Self;
    fn max_const(self, c: f64) -> Self;
    fn abs(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn value(&self) -> f64;

    /// `self + span`, rounded up where needed so that the result minus
    /// `self` is never below `span`. Differentiates like `+`.
    fn add_span(self, span: Self) -> Self;

    fn relu(self) -> Self {
        self.max_const(0.0)
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }

    fn add_const(self, c: f64) -> f64 {
        self + c
    }

    fn scale(self, c: f64) -> f64 {
        self * c
    }

    fn max(self, other: f64) -> f64 {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn max_const(self, c: f64) -> f64 {
        if self >= c {
            self
        } else {
            c
        }
    }

    fn abs(self) -> f64 {
        f64::abs(self)
    }

    fn exp(self) -> f64 {
        f64::exp(self)
    }

    fn ln(self) -> f64 {
        f64::ln(self)
    }

    fn value(&self) -> f64 {
        *self
    }

    fn add_span(self, span: f64) -> f64 {
        add_span(self, span)
    }
}

pub(crate) fn add_span(a: f64, span: f64) -> f64 {
    let mut r = a + span;
    while r - a < span {
        r = r.next_up();
    }
    r
}

/// Sum of a sequence of scalars; `zero` is returned for an empty sequence.
pub fn sum_all<S: Scalar>(zero: S, items: impl IntoIterator<Item = S>) -> S {
    let mut it = items.into_iter();
    match it.next() {
        None => zero,
        Some(first) => it.fold(first, |acc, x| acc + x),
    }
}
