use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::degree::Degree;
use crate::opalg::RatMatrix;
use crate::scalar::Scalar;

use super::sparse::Terms;
use super::MultiIndex;

/// Polynomial `Σ c_α x^α` in `n` variables.
///
/// Also used for constant-coefficient symbols in `∂`, where the exponent
/// vector counts partial derivatives instead of coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    pub(crate) terms: Terms<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            terms: Terms::new(n),
        }
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self::monomial(MultiIndex::zero(n), c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, S::one())
    }

    pub fn monomial(alpha: MultiIndex, c: S) -> Self {
        let n = alpha.dim();
        Polynomial {
            terms: Terms::from_iter(n, [(alpha, c)]),
        }
    }

    /// The coordinate `x_i` (0-based).
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, i), S::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, S)>>(n: usize, iter: I) -> Self {
        Polynomial {
            terms: Terms::from_iter(n, iter),
        }
    }

    pub fn dim(&self) -> usize {
        self.terms.n
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> S {
        self.terms.coeff(alpha)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.map.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn total_degree(&self) -> Degree {
        self.terms.degree()
    }

    /// Lowest total degree of a monomial present; `None` for the zero polynomial.
    pub fn vanishing_order(&self) -> Option<u32> {
        self.terms.min_degree()
    }

    pub fn scale(&self, c: &S) -> Self {
        Polynomial {
            terms: self.terms.scale(c),
        }
    }

    pub fn conj(&self) -> Self {
        Polynomial {
            terms: self.terms.conj(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Polynomial::one(self.dim());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `∂_i f`
    pub fn derivative(&self, i: usize) -> Self {
        let n = self.dim();
        Polynomial::from_terms(
            n,
            self.terms().filter_map(|(a, c)| {
                let e = a.exponents()[i];
                (e > 0).then(|| {
                    let lowered = a.checked_sub(&MultiIndex::unit(n, i)).unwrap();
                    (lowered, c.clone() * S::from_integer(e as i64))
                })
            }),
        )
    }

    /// `∂^γ f`
    pub fn derivative_multi(&self, gamma: &MultiIndex) -> Self {
        let n = self.dim();
        Polynomial::from_terms(
            n,
            self.terms().filter_map(|(a, c)| {
                a.checked_sub(gamma).map(|rest| {
                    // α!/(α-γ)!
                    let falling = a.factorial() / rest.factorial();
                    (rest, c.clone() * S::from_bigint(falling))
                })
            }),
        )
    }

    /// `x ↦ f(Lx)`
    pub fn compose_linear(&self, l: &RatMatrix) -> Self {
        let n = self.dim();
        assert_eq!(l.dim(), n, "pullback dimension mismatch");
        let images: Vec<Polynomial<S>> = (0..n)
            .map(|i| {
                Polynomial::from_terms(
                    n,
                    (0..n).map(|j| {
                        (
                            MultiIndex::unit(n, j),
                            S::from_rational(l.get(i, j).clone()),
                        )
                    }),
                )
            })
            .collect();
        let mut out = Polynomial::zero(n);
        for (alpha, c) in self.terms() {
            let mut term = Polynomial::constant(n, c.clone());
            for (i, &e) in alpha.exponents().iter().enumerate() {
                if e > 0 {
                    term = &term * &images[i].pow(e);
                }
            }
            out = &out + &term;
        }
        out
    }
}

impl<S: Scalar> Add for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: Self) -> Polynomial<S> {
        Polynomial {
            terms: self.terms.add(&rhs.terms),
        }
    }
}

impl<S: Scalar> Sub for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: Self) -> Polynomial<S> {
        Polynomial {
            terms: self.terms.add(&rhs.terms.neg()),
        }
    }
}

impl<S: Scalar> Neg for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        Polynomial {
            terms: self.terms.neg(),
        }
    }
}

impl<S: Scalar> Mul for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: Self) -> Polynomial<S> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        let mut out = Terms::new(self.dim());
        for (a, c) in self.terms() {
            for (b, d) in rhs.terms() {
                out.add_term(a.add(b), c.clone() * d.clone());
            }
        }
        Polynomial { terms: out }
    }
}

/// Writes `c*x1^2*x3` style text with the given variable prefix, 1-based or
/// 0-based depending on `offset`.
pub(crate) fn write_monomial(
    f: &mut impl fmt::Write,
    alpha: &MultiIndex,
    prefix: &str,
    offset: usize,
) -> fmt::Result {
    let mut first = true;
    for (i, &e) in alpha.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "{prefix}{}", i + offset)?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Signed sum of `coeff*monomial` terms, highest degree first.
pub(crate) fn write_sum<S: Scalar>(
    f: &mut impl fmt::Write,
    terms: &[(MultiIndex, S)],
    prefix: &str,
    offset: usize,
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (idx, (alpha, c)) in terms.iter().rev().enumerate() {
        let t = crate::scalar::coeff_text(c);
        match (idx, t.negative) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let constant = alpha.order() == 0;
        match (t.body, constant) {
            (Some(b), true) => write!(f, "{b}")?,
            (None, true) => write!(f, "1")?,
            (Some(b), false) => {
                write!(f, "{b}*")?;
                write_monomial(f, alpha, prefix, offset)?;
            }
            (None, false) => write_monomial(f, alpha, prefix, offset)?,
        }
    }
    Ok(())
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self.terms().map(|(a, c)| (a.clone(), c.clone())).collect();
        write_sum(f, &terms, "x", 1)
    }
}
