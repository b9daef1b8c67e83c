//! Distributions supported at the origin and their pairing with polynomials.
//!
//! `D'({0})_{≤r}` is spanned by `δ^(α) = ∂^α δ` with `|α| ≤ r`, so that
//! `⟨δ^(α), φ⟩ = (-1)^{|α|} (∂^α φ)(0)`. The maps [`smap`] and [`tmap`] move
//! between delta vectors and polynomials, and [`inner`] is the scalar product
//! `(v|w)_r = Σ α! v̄_α w_α` that all adjoints in the crate refer to.

mod multi_index;
mod polynomial;
mod sparse;

use std::fmt;
use std::ops::{Add, Neg, Sub};

pub use multi_index::{basis, binomial, enumerate, factorial, MultiIndex};
pub use polynomial::Polynomial;
pub(crate) use polynomial::{write_monomial, write_sum};

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use sparse::Terms;

/// Element `Σ v_α δ^(α)` of `D'({0})`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaVector<S> {
    terms: Terms<S>,
}

impl<S: Scalar> DeltaVector<S> {
    pub fn zero(n: usize) -> Self {
        DeltaVector {
            terms: Terms::new(n),
        }
    }

    /// `δ^(α)`
    pub fn basis(alpha: MultiIndex) -> Self {
        let n = alpha.dim();
        DeltaVector {
            terms: Terms::from_iter(n, [(alpha, S::one())]),
        }
    }

    /// `δ` itself.
    pub fn delta(n: usize) -> Self {
        Self::basis(MultiIndex::zero(n))
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, S)>>(n: usize, iter: I) -> Self {
        DeltaVector {
            terms: Terms::from_iter(n, iter),
        }
    }

    /// Inverse of [`DeltaVector::to_coords`].
    pub fn from_coords(n: usize, basis: &[MultiIndex], coords: &[S]) -> Self {
        debug_assert_eq!(basis.len(), coords.len());
        Self::from_terms(n, basis.iter().cloned().zip(coords.iter().cloned()))
    }

    /// Coordinates in the given basis. Terms outside the basis are dropped;
    /// callers check degrees first.
    pub fn to_coords(&self, basis: &[MultiIndex]) -> Vec<S> {
        basis.iter().map(|a| self.terms.coeff(a)).collect()
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    /// `max |α|` over nonzero coefficients, `-∞` for zero.
    pub fn degree(&self) -> Degree {
        self.terms.degree()
    }

    pub fn scale(&self, c: &S) -> Self {
        DeltaVector {
            terms: self.terms.scale(c),
        }
    }

    pub fn conj(&self) -> Self {
        DeltaVector {
            terms: self.terms.conj(),
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.dim(),
            })
        }
    }

    pub(crate) fn check_degree(&self, r: i64) -> Result<()> {
        match self.degree() {
            Degree::Finite(d) if d > r => Err(Error::DegreeOverflow { degree: d, max: r }),
            _ => Ok(()),
        }
    }
}

impl<S: Scalar> Add for &DeltaVector<S> {
    type Output = DeltaVector<S>;
    fn add(self, rhs: Self) -> DeltaVector<S> {
        DeltaVector {
            terms: self.terms.add(&rhs.terms),
        }
    }
}

impl<S: Scalar> Sub for &DeltaVector<S> {
    type Output = DeltaVector<S>;
    fn sub(self, rhs: Self) -> DeltaVector<S> {
        DeltaVector {
            terms: self.terms.add(&rhs.terms.neg()),
        }
    }
}

impl<S: Scalar> Neg for &DeltaVector<S> {
    type Output = DeltaVector<S>;
    fn neg(self) -> DeltaVector<S> {
        DeltaVector {
            terms: self.terms.neg(),
        }
    }
}

impl<S: Scalar> fmt::Display for DeltaVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*delta{}", crate::scalar::scalar_text(c), alpha)?;
        }
        Ok(())
    }
}

fn sign<S: Scalar>(alpha: &MultiIndex) -> S {
    if alpha.is_odd() {
        -S::one()
    } else {
        S::one()
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Bilinear pairing `⟨v, f⟩`, with `⟨δ^(α), x^β⟩ = (-1)^{|α|} α! [α=β]`.
pub fn pair<S: Scalar>(v: &DeltaVector<S>, f: &Polynomial<S>) -> Result<S> {
    check_same_dim(v.dim(), f.dim())?;
    Ok(v.terms().fold(S::zero(), |acc, (alpha, c)| {
        let fc = f.coeff(alpha);
        if fc.is_zero() {
            acc
        } else {
            acc + sign::<S>(alpha) * S::from_bigint(alpha.factorial()) * c.clone() * fc
        }
    }))
}

/// `S_r v = Σ_{|α|≤r} (x^α/α!) ⟨v, x^α⟩`, i.e. `δ^(α) ↦ (-1)^{|α|} x^α`.
pub fn smap<S: Scalar>(r: i64, v: &DeltaVector<S>) -> Result<Polynomial<S>> {
    v.check_degree(r)?;
    Ok(Polynomial::from_terms(
        v.dim(),
        v.terms()
            .map(|(alpha, c)| (alpha.clone(), sign::<S>(alpha) * c.clone())),
    ))
}

/// `T_r f = Σ_{|α|≤r} (δ^(α)/α!) ⟨δ^(α), f⟩`: truncation to degree `r`.
pub fn tmap<S: Scalar>(r: i64, f: &Polynomial<S>) -> DeltaVector<S> {
    DeltaVector::from_terms(
        f.dim(),
        f.terms()
            .filter(|(alpha, _)| (alpha.order() as i64) <= r)
            .map(|(alpha, c)| (alpha.clone(), sign::<S>(alpha) * c.clone())),
    )
}

/// `(v|w)_r = Σ_{|α|≤r} α! v̄_α w_α`.
pub fn inner<S: Scalar>(r: i64, v: &DeltaVector<S>, w: &DeltaVector<S>) -> Result<S> {
    check_same_dim(v.dim(), w.dim())?;
    v.check_degree(r)?;
    w.check_degree(r)?;
    Ok(inner_unchecked(v, w))
}

pub(crate) fn inner_unchecked<S: Scalar>(v: &DeltaVector<S>, w: &DeltaVector<S>) -> S {
    v.terms().fold(S::zero(), |acc, (alpha, c)| {
        let wc = w.coeff(alpha);
        if wc.is_zero() {
            acc
        } else {
            acc + S::from_bigint(alpha.factorial()) * c.conj() * wc
        }
    })
}
