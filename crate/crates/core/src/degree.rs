//! Degrees of divergence: exact values on delta vectors and upper-bound rules
//! for derivatives, monomial factors, vanishing coefficients, tensor products
//! and operators.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

use crate::deltaspace::{DeltaVector, MultiIndex};
use crate::opalg::{essential_order, OperatorExpr};
use crate::scalar::{Rational, Scalar};

/// An integer degree or `-∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(i64),
}

impl Degree {
    pub fn finite(self) -> Option<i64> {
        match self {
            Degree::Finite(d) => Some(d),
            Degree::NegInfinity => None,
        }
    }

    /// Adds `k` to a finite degree; `-∞` absorbs.
    pub fn shift(self, k: i64) -> Degree {
        match self {
            Degree::Finite(d) => Degree::Finite(d + k),
            Degree::NegInfinity => Degree::NegInfinity,
        }
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Degree::NegInfinity, Degree::NegInfinity) => Ordering::Equal,
            (Degree::NegInfinity, _) => Ordering::Less,
            (_, Degree::NegInfinity) => Ordering::Greater,
            (Degree::Finite(a), Degree::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exactness {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeBound {
    pub value: Degree,
    pub exactness: Exactness,
    /// Set when the bound came from a non-integer degree that was floored.
    pub original: Option<Rational>,
}

impl DegreeBound {
    pub fn exact(value: Degree) -> Self {
        DegreeBound {
            value,
            exactness: Exactness::Exact,
            original: None,
        }
    }

    pub fn upper(value: Degree) -> Self {
        DegreeBound {
            value,
            exactness: Exactness::UpperBound,
            original: None,
        }
    }

    pub fn finite(d: i64) -> Self {
        Self::exact(Degree::Finite(d))
    }

    /// Floors a rational degree. Integers stay exact; anything else is an
    /// upper bound that remembers where it came from.
    pub fn from_rational(q: &Rational) -> Self {
        let floor = q.numer().div_floor(q.denom());
        let d: i64 = i64::try_from(floor).expect("degree out of i64 range");
        if q.is_integer() {
            Self::finite(d)
        } else {
            DegreeBound {
                value: Degree::Finite(d),
                exactness: Exactness::UpperBound,
                original: Some(q.clone()),
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::Exact
    }

    fn shifted(&self, k: i64) -> Self {
        DegreeBound {
            value: self.value.shift(k),
            exactness: Exactness::UpperBound,
            original: None,
        }
    }
}

impl fmt::Display for DegreeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exactness {
            Exactness::Exact => write!(f, "{}", self.value),
            Exactness::UpperBound => write!(f, "<= {}", self.value),
        }
    }
}

/// Exact degree `max |α|` of a delta vector.
pub fn deg_delta<S: Scalar>(v: &DeltaVector<S>) -> DegreeBound {
    DegreeBound::exact(v.degree())
}

/// `deg ∂^γ u ≤ deg u + |γ|`
pub fn bound_derivative(d: &DegreeBound, gamma: &MultiIndex) -> DegreeBound {
    d.shifted(gamma.order() as i64)
}

/// `deg x^β u ≤ deg u − |β|`
pub fn bound_monomial(d: &DegreeBound, beta: &MultiIndex) -> DegreeBound {
    d.shifted(-(beta.order() as i64))
}

/// Multiplication by a smooth function vanishing to order `k` at the origin.
pub fn bound_vanishing_factor(d: &DegreeBound, k: u32) -> DegreeBound {
    d.shifted(-(k as i64))
}

/// `u ⊗ v` on `ℝ^{n₁} × ℝ^{n₂}`: scaling degrees add, so degrees of
/// divergence add too.
pub fn bound_tensor(d1: &DegreeBound, n1: usize, d2: &DegreeBound, n2: usize) -> DegreeBound {
    let value = match (d1.value, d2.value) {
        (Degree::Finite(a), Degree::Finite(b)) => {
            let (n1, n2) = (n1 as i64, n2 as i64);
            Degree::Finite((a + n1) + (b + n2) - (n1 + n2))
        }
        _ => Degree::NegInfinity,
    };
    DegreeBound::upper(value)
}

/// `deg Qu ≤ deg u + q` with `q` the essential order of `Q`.
pub fn bound_operator<S: Scalar>(d: &DegreeBound, q: &OperatorExpr<S>) -> DegreeBound {
    d.shifted(essential_order(q, 0).q as i64)
}
