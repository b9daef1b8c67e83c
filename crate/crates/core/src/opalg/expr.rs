use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::deltaspace::{write_monomial, DeltaVector, MultiIndex, Polynomial};
use crate::error::{Error, Result};
use crate::scalar::{coeff_text, Scalar};

use super::RatMatrix;

/// Derivative and pullback part of a normal-form term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub derivative: MultiIndex,
    /// `None` stands for the identity map.
    pub pullback: Option<RatMatrix>,
}

/// Operator `Σ a(x) ∂^γ L*` on distributions in `n` variables, where
/// `(L*u)(x) = u(Lx)`.
///
/// Always stored in normal form: coefficients left, derivatives in the middle,
/// at most one pullback on the right, one coefficient polynomial per
/// `(γ, L)` and no zero coefficients. Equality is therefore structural.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorExpr<S> {
    n: usize,
    terms: BTreeMap<TermKey, Polynomial<S>>,
}

/// Building blocks for [`OperatorExpr::product`].
#[derive(Clone, Debug, PartialEq)]
pub enum Factor<S> {
    Scalar(S),
    /// `x_i`, 0-based.
    Coordinate(usize),
    /// `∂_i`, 0-based.
    Partial(usize),
    Pullback(RatMatrix),
}

impl<S: Scalar> OperatorExpr<S> {
    pub fn zero(n: usize) -> Self {
        OperatorExpr {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, S::one())
    }

    pub fn scalar(n: usize, c: S) -> Self {
        Self::multiplication(Polynomial::constant(n, c))
    }

    /// Multiplication by `a(x)`.
    pub fn multiplication(a: Polynomial<S>) -> Self {
        Self::term(a.clone(), MultiIndex::zero(a.dim()), None)
    }

    pub fn coordinate(n: usize, i: usize) -> Self {
        Self::multiplication(Polynomial::var(n, i))
    }

    pub fn partial(n: usize, i: usize) -> Self {
        Self::derivative(MultiIndex::unit(n, i))
    }

    /// `∂^γ`
    pub fn derivative(gamma: MultiIndex) -> Self {
        let n = gamma.dim();
        Self::term(Polynomial::one(n), gamma, None)
    }

    /// `u ↦ u∘L`; fails for singular `L`.
    pub fn pullback(l: RatMatrix) -> Result<Self> {
        if !l.is_invertible() {
            return Err(Error::SingularPullback);
        }
        let n = l.dim();
        Ok(Self::term(Polynomial::one(n), MultiIndex::zero(n), Some(l)))
    }

    /// `a(x) ∂^γ L*`
    pub fn term(a: Polynomial<S>, gamma: MultiIndex, pullback: Option<RatMatrix>) -> Self {
        let n = a.dim();
        assert_eq!(gamma.dim(), n, "dimension mismatch");
        let mut out = Self::zero(n);
        out.add_term(
            TermKey {
                derivative: gamma,
                pullback: pullback.filter(|l| !l.is_identity()),
            },
            a,
        );
        out
    }

    /// Ordered product of factors, e.g. `[Partial(0), Coordinate(0)]` is `∂₁∘x₁`.
    pub fn product(n: usize, factors: &[Factor<S>]) -> Result<Self> {
        let mut acc = Self::identity(n);
        for f in factors {
            let op = match f {
                Factor::Scalar(c) => Self::scalar(n, c.clone()),
                Factor::Coordinate(i) | Factor::Partial(i) if *i >= n => {
                    return Err(Error::IndexOutOfRange { index: *i, n })
                }
                Factor::Coordinate(i) => Self::coordinate(n, *i),
                Factor::Partial(i) => Self::partial(n, *i),
                Factor::Pullback(l) => {
                    if l.dim() != n {
                        return Err(Error::PullbackShape { n });
                    }
                    Self::pullback(l.clone())?
                }
            };
            acc = acc.compose(&op);
        }
        Ok(acc)
    }

    fn add_term(&mut self, key: TermKey, a: Polynomial<S>) {
        if a.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(a);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &a;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Polynomial<S>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_pullback(&self) -> bool {
        self.terms.keys().any(|k| k.pullback.is_some())
    }

    /// Highest derivative order present; 0 for the zero operator.
    pub fn order(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.derivative.order())
            .max()
            .unwrap_or(0)
    }

    /// `Some(c)` if the operator is multiplication by the constant `c`.
    pub fn as_scalar(&self) -> Option<S> {
        if self.is_zero() {
            return Some(S::zero());
        }
        let (key, a) = self.terms.iter().next()?;
        let constant = self.terms.len() == 1
            && key.derivative.order() == 0
            && key.pullback.is_none()
            && a.total_degree() == crate::degree::Degree::Finite(0);
        constant.then(|| a.coeff(&MultiIndex::zero(self.n)))
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.n == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: other,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        for (k, a) in &other.terms {
            out.add_term(k.clone(), a.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.n);
        for (k, a) in &self.terms {
            out.add_term(k.clone(), a.scale(c));
        }
        out
    }

    /// Complex conjugate `Q̄`: conjugated coefficients.
    pub fn conj(&self) -> Self {
        OperatorExpr {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.clone(), a.conj()))
                .collect(),
        }
    }

    /// `self ∘ other`, normalized.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = Self::zero(self.n);
        for (k1, a) in &self.terms {
            for (k2, b) in &other.terms {
                compose_terms(&mut out, a, k1, b, k2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.n), |acc, _| acc.compose(self))
    }

    /// `[self, other] = self∘other − other∘self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.commutator(other).is_zero()
    }

    /// `Q^t` with `⟨Qu, φ⟩ = ⟨u, Q^t φ⟩`.
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for (k, a) in &self.terms {
            let sign = if k.derivative.is_odd() {
                -S::one()
            } else {
                S::one()
            };
            let d = Self::derivative(k.derivative.clone()).scale(&sign);
            let mut t = d.compose(&Self::multiplication(a.clone()));
            if let Some(l) = &k.pullback {
                let inv = l.inverse().expect("stored pullbacks are invertible");
                let w = S::one() / S::from_rational(l.abs_det());
                t = Self::term(Polynomial::constant(n, w), MultiIndex::zero(n), Some(inv))
                    .compose(&t);
            }
            out = out.add(&t);
        }
        out
    }

    /// `Q v` for `v ∈ D'({0})`.
    pub fn apply_delta(&self, v: &DeltaVector<S>) -> Result<DeltaVector<S>> {
        self.check_dim(v.dim())?;
        let mut out = DeltaVector::zero(self.n);
        for (alpha, c) in v.terms() {
            out = &out + &self.apply_delta_basis(alpha).scale(c);
        }
        Ok(out)
    }

    /// `Q δ^(α)`
    pub fn apply_delta_basis(&self, alpha: &MultiIndex) -> DeltaVector<S> {
        let n = self.n;
        let mut acc: BTreeMap<MultiIndex, S> = BTreeMap::new();
        for (k, a) in &self.terms {
            let pulled: Vec<(MultiIndex, S)> = match &k.pullback {
                None => vec![(alpha.clone(), S::one())],
                Some(l) => {
                    let m = l.inverse().expect("stored pullbacks are invertible");
                    let w = S::one() / S::from_rational(l.abs_det());
                    pullback_symbol::<S>(&m, alpha)
                        .terms()
                        .map(|(b, d)| (b.clone(), d.clone() * w.clone()))
                        .collect()
                }
            };
            for (beta, d) in pulled {
                let shifted = beta.add(&k.derivative);
                for (mono, c) in a.terms() {
                    if let Some(rest) = shifted.checked_sub(mono) {
                        let falling = shifted.factorial() / rest.factorial();
                        let sign = if mono.is_odd() { -S::one() } else { S::one() };
                        let val = sign * S::from_bigint(falling) * c.clone() * d.clone();
                        let e = acc.entry(rest).or_insert_with(S::zero);
                        *e = e.clone() + val;
                    }
                }
            }
        }
        DeltaVector::from_terms(n, acc)
    }

    /// `Q f` for a polynomial `f`.
    pub fn apply_poly(&self, f: &Polynomial<S>) -> Result<Polynomial<S>> {
        self.check_dim(f.dim())?;
        let mut out = Polynomial::zero(self.n);
        for (k, a) in &self.terms {
            let pulled = match &k.pullback {
                None => f.clone(),
                Some(l) => f.compose_linear(l),
            };
            out = &out + &(a * &pulled.derivative_multi(&k.derivative));
        }
        Ok(out)
    }
}

/// Constant-coefficient symbol of `L* ∂^α (L*)⁻¹ = Π_k (Σ_i M_{ik} ∂_i)^{α_k}`
/// with `M = L⁻¹`, as a polynomial in the `∂` symbols.
fn pullback_symbol<S: Scalar>(m: &RatMatrix, alpha: &MultiIndex) -> Polynomial<S> {
    Polynomial::monomial(alpha.clone(), S::one()).compose_linear(&m.transpose())
}

// (a ∂^γ L*) ∘ (b ∂^δ K*) = Σ_β C(γ,β) a (∂^β b̃) ∂^{γ−β} D(∂) (KL)*
// with b̃ = b∘L and D the pullback symbol of δ.
fn compose_terms<S: Scalar>(
    out: &mut OperatorExpr<S>,
    a: &Polynomial<S>,
    k1: &TermKey,
    b: &Polynomial<S>,
    k2: &TermKey,
) {
    let (b_pulled, d_symbol, pullback) = match &k1.pullback {
        None => (
            b.clone(),
            Polynomial::monomial(k2.derivative.clone(), S::one()),
            k2.pullback.clone(),
        ),
        Some(l) => {
            let m = l.inverse().expect("stored pullbacks are invertible");
            let combined = match &k2.pullback {
                None => l.clone(),
                Some(k) => k.mul(l),
            };
            (
                b.compose_linear(l),
                pullback_symbol(&m, &k2.derivative),
                Some(combined).filter(|p| !p.is_identity()),
            )
        }
    };
    let gamma = &k1.derivative;
    for beta in gamma.divisors() {
        let db = b_pulled.derivative_multi(&beta);
        if db.is_zero() {
            continue;
        }
        let binom = S::from_bigint(gamma.binomial(&beta));
        let coeff = (a * &db).scale(&binom);
        let rest = gamma.checked_sub(&beta).expect("divisor");
        for (eps, d) in d_symbol.terms() {
            out.add_term(
                TermKey {
                    derivative: rest.add(eps),
                    pullback: pullback.clone(),
                },
                coeff.scale(d),
            );
        }
    }
}

/// Rebuilds `Q` from its terms by composing elementary factors.
pub fn normal_form<S: Scalar>(q: &OperatorExpr<S>) -> OperatorExpr<S> {
    let n = q.dim();
    let mut out = OperatorExpr::zero(n);
    for (k, a) in q.terms() {
        let mut t = OperatorExpr::multiplication(a.clone())
            .compose(&OperatorExpr::derivative(k.derivative.clone()));
        if let Some(l) = &k.pullback {
            t = t.compose(&OperatorExpr::pullback(l.clone()).expect("invertible"));
        }
        out = out.add(&t);
    }
    out
}

fn print_order(a: &(MultiIndex, &TermKey), b: &(MultiIndex, &TermKey)) -> Ordering {
    let (ma, ka) = a;
    let (mb, kb) = b;
    kb.derivative
        .order()
        .cmp(&ka.derivative.order())
        .then_with(|| ka.derivative.cmp(&kb.derivative))
        .then_with(|| ka.pullback.cmp(&kb.pullback))
        .then_with(|| mb.order().cmp(&ma.order()))
        .then_with(|| ma.cmp(mb))
}

impl<S: Scalar> fmt::Display for OperatorExpr<S> {
    /// Text in the expression syntax: `x1^2*d1^2 + x1*d1 - 3/2*reflect([0,1;1,0])`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<(MultiIndex, &TermKey, &S)> = Vec::new();
        for (k, a) in &self.terms {
            for (m, c) in a.terms() {
                items.push((m.clone(), k, c));
            }
        }
        if items.is_empty() {
            return write!(f, "0");
        }
        items.sort_by(|x, y| print_order(&(x.0.clone(), x.1), &(y.0.clone(), y.1)));
        let n = self.n;
        for (idx, (mono, key, c)) in items.iter().enumerate() {
            let t = coeff_text(*c);
            match (idx, t.negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts: Vec<String> = Vec::new();
            if let Some(b) = t.body {
                parts.push(b);
            }
            if mono.order() > 0 {
                let mut s = String::new();
                write_monomial(&mut s, mono, "x", 1)?;
                parts.push(s);
            }
            if key.derivative.order() > 0 {
                let mut s = String::new();
                write_monomial(&mut s, &key.derivative, "d", 1)?;
                parts.push(s);
            }
            if let Some(l) = &key.pullback {
                if *l == RatMatrix::neg_identity(n) {
                    parts.push("parity".into());
                } else {
                    parts.push(format!("reflect({l})"));
                }
            }
            if parts.is_empty() {
                parts.push("1".into());
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltaspace::{enumerate, pair};
    use crate::scalar::{rational, Rational};

    type Op = OperatorExpr<Rational>;
    type D = DeltaVector<Rational>;
    type P = Polynomial<Rational>;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn x(n: usize, i: usize) -> Op {
        Op::coordinate(n, i)
    }

    fn d(n: usize, i: usize) -> Op {
        Op::partial(n, i)
    }

    fn swap2() -> RatMatrix {
        RatMatrix::from_rows(vec![
            vec![rational(0, 1), rational(1, 1)],
            vec![rational(1, 1), rational(0, 1)],
        ])
        .unwrap()
    }

    fn shear2() -> RatMatrix {
        RatMatrix::from_rows(vec![
            vec![rational(2, 1), rational(1, 1)],
            vec![rational(0, 1), rational(1, 3)],
        ])
        .unwrap()
    }

    #[test]
    fn leibniz_rule() {
        let op = d(1, 0).compose(&x(1, 0));
        assert_eq!(op, x(1, 0).compose(&d(1, 0)).add(&Op::identity(1)));
        assert_eq!(op.to_string(), "x1*d1 + 1");
        let f = Op::product(1, &[Factor::Partial(0), Factor::Coordinate(0)]).unwrap();
        assert_eq!(f, op);
    }

    #[test]
    fn euler_squared() {
        let e = x(1, 0).compose(&d(1, 0));
        let sq = e.pow(2);
        assert_eq!(sq.to_string(), "x1^2*d1^2 + x1*d1");
        // oracle: (x∂)² x^k = k² x^k
        for k in 0..6u32 {
            let f = P::monomial(mi(&[k]), rational(1, 1));
            assert_eq!(
                sq.apply_poly(&f).unwrap(),
                f.scale(&rational((k * k) as i64, 1))
            );
        }
    }

    #[test]
    fn parity_is_involution() {
        let p = Op::pullback(RatMatrix::neg_identity(2)).unwrap();
        assert_eq!(p.compose(&p), Op::identity(2));
        assert_eq!(p.to_string(), "parity");
        assert_eq!(p.transpose(), p);
    }

    #[test]
    fn transposes() {
        assert_eq!(d(1, 0).transpose(), d(1, 0).neg());
        let e = x(1, 0).compose(&d(1, 0));
        assert_eq!(e.transpose(), e.neg().sub(&Op::identity(1)));
    }

    fn pairing_identity(q: &Op, n: usize, depth: u32) {
        let qt = q.transpose();
        for alpha in enumerate(n, depth) {
            let lhs_v = q.apply_delta_basis(&alpha);
            for beta in enumerate(n, depth + 2) {
                let f = P::monomial(beta, rational(1, 1));
                let lhs = pair(&lhs_v, &f).unwrap();
                let rhs = pair(&D::basis(alpha.clone()), &qt.apply_poly(&f).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "Q = {q}, alpha = {alpha}");
            }
        }
    }

    #[test]
    fn transpose_satisfies_pairing_identity() {
        pairing_identity(&x(1, 0).compose(&d(1, 0)), 1, 3);
        let q = x(2, 0)
            .compose(&x(2, 1))
            .compose(&d(2, 1))
            .add(&d(2, 0).pow(2))
            .compose(&Op::pullback(shear2()).unwrap())
            .add(
                &x(2, 1)
                    .compose(&Op::pullback(swap2()).unwrap())
                    .compose(&d(2, 0)),
            );
        pairing_identity(&q, 2, 2);
        assert_eq!(q.transpose().transpose(), q);
    }

    #[test]
    fn pullback_conjugates_derivatives() {
        // L* ∂_k = Σ_i M_ik ∂_i L*
        let l = shear2();
        let m = l.inverse().unwrap();
        let lhs = Op::pullback(l.clone()).unwrap().compose(&d(2, 0));
        let rhs = d(2, 0)
            .scale(m.get(0, 0))
            .add(&d(2, 1).scale(m.get(1, 0)))
            .compose(&Op::pullback(l).unwrap());
        assert_eq!(lhs, rhs);
        // pullbacks compose contravariantly
        let a = Op::pullback(shear2()).unwrap();
        let b = Op::pullback(swap2()).unwrap();
        let ab = a.compose(&b);
        let f = &P::var(2, 0) * &(&P::var(2, 0) + &P::var(2, 1));
        assert_eq!(
            ab.apply_poly(&f).unwrap(),
            a.apply_poly(&b.apply_poly(&f).unwrap()).unwrap()
        );
    }

    #[test]
    fn action_on_deltas() {
        assert_eq!(
            d(1, 0).apply_delta(&D::delta(1)).unwrap(),
            D::basis(mi(&[1]))
        );
        assert_eq!(
            x(1, 0).apply_delta(&D::basis(mi(&[2]))).unwrap(),
            D::basis(mi(&[1])).scale(&rational(-2, 1))
        );
        let p = Op::pullback(RatMatrix::neg_identity(2)).unwrap();
        assert_eq!(
            p.apply_delta(&D::basis(mi(&[2, 1]))).unwrap(),
            D::basis(mi(&[2, 1])).scale(&rational(-1, 1))
        );
        assert!(matches!(
            d(1, 0).apply_delta(&D::delta(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn normal_form_is_idempotent() {
        let q = d(2, 0)
            .compose(&x(2, 0))
            .compose(&Op::pullback(shear2()).unwrap())
            .compose(&x(2, 1));
        assert_eq!(normal_form(&q), q);
        assert_eq!(normal_form(&normal_form(&q)), q);
    }

    #[test]
    fn commutators() {
        assert_eq!(d(1, 0).commutator(&x(1, 0)), Op::identity(1));
        assert!(x(2, 0).commutes_with(&x(2, 1)));
        assert_eq!(Op::identity(1).as_scalar(), Some(rational(1, 1)));
        assert_eq!(d(1, 0).as_scalar(), None);
    }
}
