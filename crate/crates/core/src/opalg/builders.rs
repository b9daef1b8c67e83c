use std::fmt;
use std::str::FromStr;

use crate::deltaspace::{MultiIndex, Polynomial};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

use super::{OperatorExpr, RatMatrix};

/// Diagonal metric `diag(±1, …)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSignature(format!("{signs:?}")));
        }
        Ok(Signature(signs))
    }

    /// `diag(+1, −1, …, −1)`
    pub fn default_for(n: usize) -> Self {
        let mut s = vec![-1; n];
        if n > 0 {
            s[0] = 1;
        }
        Signature(s)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `g_{μμ} = g^{μμ}`
    pub fn g(&self, mu: usize) -> i64 {
        self.0[mu] as i64
    }

    /// `-g`: `(+,−,−,−)` ↔ `(−,+,+,+)`.
    pub fn flipped(&self) -> Self {
        Signature(self.0.iter().map(|s| -s).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::InvalidSignature(format!(
                "{self} has {} entries, expected {n}",
                self.dim()
            )))
        }
    }

    pub(crate) fn check_index(&self, mu: usize) -> Result<()> {
        if mu < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: mu,
                n: self.dim(),
            })
        }
    }
}

impl FromStr for Signature {
    type Err = Error;

    /// `"+---"`
    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::InvalidSignature(s.to_string())),
            })
            .collect::<Result<Vec<i8>>>()?;
        Signature::new(signs).map_err(|_| Error::InvalidSignature(s.to_string()))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", if s > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// `Σ xᵢ∂ᵢ − a`
pub fn euler<S: Scalar>(n: usize, a: S) -> OperatorExpr<S> {
    (0..n)
        .map(|i| OperatorExpr::coordinate(n, i).compose(&OperatorExpr::partial(n, i)))
        .fold(OperatorExpr::scalar(n, -a), |acc, t| acc.add(&t))
}

/// `□ + m² = g^{μν}∂_μ∂_ν + m²`
pub fn dalembert<S: Scalar>(n: usize, m2: Rational, sig: &Signature) -> OperatorExpr<S> {
    (0..n)
        .map(|mu| {
            OperatorExpr::derivative(MultiIndex::unit(n, mu).add(&MultiIndex::unit(n, mu)))
                .scale(&S::from_integer(sig.g(mu)))
        })
        .fold(OperatorExpr::scalar(n, S::from_rational(m2)), |acc, t| {
            acc.add(&t)
        })
}

/// `L_{μν} = x_μ∂_ν − x_ν∂_μ` with `x_μ = g_{μμ} x^μ`.
pub fn lorentz_generator<S: Scalar>(
    n: usize,
    mu: usize,
    nu: usize,
    sig: &Signature,
) -> Result<OperatorExpr<S>> {
    sig.check_dim(n)?;
    sig.check_index(mu)?;
    sig.check_index(nu)?;
    let lowered = |i: usize| {
        OperatorExpr::multiplication(Polynomial::var(n, i).scale(&S::from_integer(sig.g(i))))
    };
    let a = lowered(mu).compose(&OperatorExpr::partial(n, nu));
    let b = lowered(nu).compose(&OperatorExpr::partial(n, mu));
    Ok(a.sub(&b))
}

/// `Σ_{μ,ν} g^{μμ} g^{νν} L_{μν}²`
pub fn casimir<S: Scalar>(n: usize, sig: &Signature) -> Result<OperatorExpr<S>> {
    sig.check_dim(n)?;
    let mut c = OperatorExpr::zero(n);
    for mu in 0..n {
        for nu in 0..n {
            if mu == nu {
                continue;
            }
            let l = lorentz_generator::<S>(n, mu, nu, sig)?;
            let w = S::from_integer(sig.g(mu) * sig.g(nu));
            c = c.add(&l.compose(&l).scale(&w));
        }
    }
    Ok(c)
}

/// Pullback `u ↦ u∘L`.
pub fn reflection<S: Scalar>(l: RatMatrix) -> Result<OperatorExpr<S>> {
    OperatorExpr::pullback(l)
}

/// `u ↦ u(−x)`
pub fn parity<S: Scalar>(n: usize) -> OperatorExpr<S> {
    OperatorExpr::pullback(RatMatrix::neg_identity(n)).expect("-I is invertible")
}

/// `∂^γ`
pub fn monomial_derivative<S: Scalar>(gamma: MultiIndex) -> OperatorExpr<S> {
    OperatorExpr::derivative(gamma)
}
