//! Counterterms for derivatives of a fundamental solution of `□ + m²` and the
//! induced maps `χ` and `χ₁` on constant-coefficient operators.

mod check;
mod explicit;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

pub use check::{
    chi_crosscheck, chi_crosscheck_with, covariance_check, monomials, CovarianceReport,
    CrosscheckReport, Mismatch,
};
pub use explicit::{alpha_coefficient, chi_explicit, lambda_contraction};

use crate::deltaspace::{write_monomial, write_sum, DeltaVector, MultiIndex, Polynomial};
use crate::error::{Error, Result};
use crate::opalg::{dalembert, OperatorExpr, RatMatrix, Signature};
use crate::scalar::{coeff_text, Rational, Scalar};
use crate::spectral::ProjectionData;

/// Polynomial `P(∂₀, …, ∂_{n−1})` together with the metric and mass that fix
/// `□ = g^{μν}∂_μ∂_ν` and `□ + m²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstCoeffOperator<S> {
    symbol: Polynomial<S>,
    sig: Signature,
    m2: Rational,
}

impl<S: Scalar> ConstCoeffOperator<S> {
    pub fn new(symbol: Polynomial<S>, sig: Signature, m2: Rational) -> Result<Self> {
        sig.check_dim(symbol.dim())?;
        Ok(ConstCoeffOperator { symbol, sig, m2 })
    }

    fn with_symbol(&self, symbol: Polynomial<S>) -> Self {
        ConstCoeffOperator {
            symbol,
            sig: self.sig.clone(),
            m2: self.m2.clone(),
        }
    }

    pub fn zero(sig: &Signature, m2: &Rational) -> Self {
        ConstCoeffOperator {
            symbol: Polynomial::zero(sig.dim()),
            sig: sig.clone(),
            m2: m2.clone(),
        }
    }

    pub fn one(sig: &Signature, m2: &Rational) -> Self {
        let z = Self::zero(sig, m2);
        z.with_symbol(Polynomial::one(sig.dim()))
    }

    /// `∂_{μ₁}⋯∂_{μ_k}`
    pub fn monomial(indices: &[usize], sig: &Signature, m2: &Rational) -> Result<Self> {
        let n = sig.dim();
        let mut e = vec![0; n];
        for &mu in indices {
            sig.check_index(mu)?;
            e[mu] += 1;
        }
        Ok(Self::zero(sig, m2).with_symbol(Polynomial::monomial(MultiIndex::new(e), S::one())))
    }

    /// `□`
    pub fn wave(sig: &Signature, m2: &Rational) -> Self {
        let n = sig.dim();
        let symbol = Polynomial::from_terms(
            n,
            (0..n).map(|mu| {
                let two = MultiIndex::unit(n, mu).add(&MultiIndex::unit(n, mu));
                (two, S::from_integer(sig.g(mu)))
            }),
        );
        Self::zero(sig, m2).with_symbol(symbol)
    }

    /// `□ + m²`
    pub fn klein_gordon(sig: &Signature, m2: &Rational) -> Self {
        let w = Self::wave(sig, m2);
        w.add(&Self::one(sig, m2).scale(&S::from_rational(m2.clone())))
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    pub fn symbol(&self) -> &Polynomial<S> {
        &self.symbol
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn m2(&self) -> &Rational {
        &self.m2
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero()
    }

    /// Highest total degree in `∂`; the zero operator has order 0.
    pub fn order(&self) -> u32 {
        self.symbol
            .terms()
            .map(|(a, _)| a.order())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with_symbol(&self.symbol + &other.symbol)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with_symbol(&self.symbol - &other.symbol)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.with_symbol(&self.symbol * &other.symbol)
    }

    pub fn pow(&self, k: u32) -> Self {
        self.with_symbol(self.symbol.pow(k))
    }

    pub fn scale(&self, c: &S) -> Self {
        self.with_symbol(self.symbol.scale(c))
    }

    /// `P(∂) ↦ P(L∂)`
    pub fn substitute(&self, l: &RatMatrix) -> Self {
        self.with_symbol(self.symbol.compose_linear(l))
    }

    pub fn to_operator(&self) -> OperatorExpr<S> {
        self.symbol
            .terms()
            .map(|(a, c)| OperatorExpr::derivative(a.clone()).scale(c))
            .fold(OperatorExpr::zero(self.dim()), |acc, t| acc.add(&t))
    }

    /// `P(∂)δ = Σ p_α δ^(α)`
    pub fn apply_to_delta(&self) -> DeltaVector<S> {
        DeltaVector::from_terms(
            self.dim(),
            self.symbol.terms().map(|(a, c)| (a.clone(), c.clone())),
        )
    }

    /// The operator `X` with `Xδ = v`.
    pub fn from_delta(v: &DeltaVector<S>, sig: &Signature, m2: &Rational) -> Result<Self> {
        Self::new(
            Polynomial::from_terms(v.dim(), v.terms().map(|(a, c)| (a.clone(), c.clone()))),
            sig.clone(),
            m2.clone(),
        )
    }

    /// Exact quotient by `□ + m²`, or `None` if the division leaves a
    /// remainder.
    pub fn divide_by_klein_gordon(&self) -> Option<Self> {
        let n = self.dim();
        let kg = Self::klein_gordon(&self.sig, &self.m2);
        let g0 = S::from_integer(self.sig.g(0));
        let two0 = MultiIndex::unit(n, 0).add(&MultiIndex::unit(n, 0));
        let mut rem = self.symbol.clone();
        let mut quot = Polynomial::zero(n);
        loop {
            let lead = rem
                .terms()
                .filter(|(a, _)| a.exponents()[0] >= 2)
                .max_by_key(|(a, _)| a.exponents()[0])
                .map(|(a, c)| (a.clone(), c.clone()));
            let Some((alpha, c)) = lead else { break };
            let beta = alpha.checked_sub(&two0).expect("exponent at least two");
            let t = Polynomial::monomial(beta, c / g0.clone());
            rem = &rem - &(&t * &kg.symbol);
            quot = &quot + &t;
        }
        rem.is_zero().then(|| self.with_symbol(quot))
    }
}

impl<S: Scalar> fmt::Display for ConstCoeffOperator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, &sorted_terms(&self.symbol), "d", 0)
    }
}

/// Listed so that printing (which walks the list backwards) shows higher
/// orders first and `d0` before `d1` within an order.
fn sorted_terms<S: Scalar>(p: &Polynomial<S>) -> Vec<(MultiIndex, S)> {
    let mut t: Vec<_> = p.terms().map(|(a, c)| (a.clone(), c.clone())).collect();
    t.sort_by(|(a, _), (b, _)| {
        a.order()
            .cmp(&b.order())
            .then_with(|| a.exponents().cmp(b.exponents()))
    });
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    ProjectionRoute,
    ExplicitFormula,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::ProjectionRoute => "projection-route",
            Provenance::ExplicitFormula => "explicit-formula",
        })
    }
}

/// `χ(S) = S + χ₁(S)(□ + m²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiResult<S> {
    pub source: ConstCoeffOperator<S>,
    pub chi: ConstCoeffOperator<S>,
    pub chi1: ConstCoeffOperator<S>,
    /// Degree of the counterterm space; negative means none was needed.
    pub s: i64,
    pub provenance: Provenance,
}

impl<S: Scalar> fmt::Display for ChiResult<S> {
    /// `d0^2 - 1/4*(box)`, where `(box)` stands for `□ + m²`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = sorted_terms(self.source.symbol());
        let chi1 = sorted_terms(self.chi1.symbol());
        if chi1.is_empty() {
            return write_sum(f, &source, "d", 0);
        }
        let lead = !source.is_empty();
        if lead {
            write_sum(f, &source, "d", 0)?;
        }
        if let [(alpha, c)] = chi1.as_slice() {
            let t = coeff_text(c);
            match (lead, t.negative) {
                (true, true) => write!(f, " - ")?,
                (true, false) => write!(f, " + ")?,
                (false, true) => write!(f, "-")?,
                (false, false) => {}
            }
            if let Some(b) = t.body {
                write!(f, "{b}*")?;
            }
            if alpha.order() > 0 {
                write_monomial(f, alpha, "d", 0)?;
                write!(f, "*")?;
            }
            write!(f, "(box)")
        } else {
            if lead {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            write_sum(f, &chi1, "d", 0)?;
            write!(f, ")*(box)")
        }
    }
}

/// Metric, mass and fundamental-solution degree for the projection route,
/// with the projection data cached per counterterm degree.
#[derive(Debug)]
pub struct ChiConfig<S> {
    pub sig: Signature,
    pub m2: Rational,
    /// Degree of divergence of the fundamental solution `v`, `Qv = cδ`.
    pub deg_v: i64,
    cache: Mutex<BTreeMap<i64, Arc<ProjectionData<S>>>>,
}

impl<S: Scalar> ChiConfig<S> {
    pub fn new(sig: Signature, m2: Rational) -> Self {
        Self::with_degree(sig, m2, -2)
    }

    pub fn with_degree(sig: Signature, m2: Rational, deg_v: i64) -> Self {
        ChiConfig {
            sig,
            m2,
            deg_v,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn for_operator(op: &ConstCoeffOperator<S>) -> Self {
        Self::new(op.sig.clone(), op.m2.clone())
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    pub fn klein_gordon(&self) -> ConstCoeffOperator<S> {
        ConstCoeffOperator::klein_gordon(&self.sig, &self.m2)
    }

    fn projection(&self, s: i64) -> Arc<ProjectionData<S>> {
        let mut cache = self.cache.lock().expect("cache lock poisoned");
        cache
            .entry(s)
            .or_insert_with(|| {
                let q = dalembert::<S>(self.dim(), self.m2.clone(), &self.sig);
                Arc::new(ProjectionData::of(&q, s))
            })
            .clone()
    }

    fn check(&self, op: &ConstCoeffOperator<S>) -> Result<()> {
        if op.sig != self.sig || op.m2 != self.m2 {
            return Err(Error::Precondition(format!(
                "operator uses metric {} and m^2 = {}, configuration has {} and {}",
                op.sig, op.m2, self.sig, self.m2
            )));
        }
        Ok(())
    }

    /// `order(S) + deg v`
    pub fn counterterm_degree(&self, op: &ConstCoeffOperator<S>) -> i64 {
        op.order() as i64 + self.deg_v
    }

    /// The delta-supported part `Θ(S) − Sv` for `Qv = cδ`.
    pub fn theta_counterterm(&self, op: &ConstCoeffOperator<S>, c: &S) -> Result<DeltaVector<S>> {
        self.check(op)?;
        let s = self.counterterm_degree(op);
        if s < 0 {
            return Ok(DeltaVector::zero(self.dim()));
        }
        let w = op.apply_to_delta().scale(c);
        self.projection(s).counterterm(&w)
    }

    pub fn chi_projection(&self, op: &ConstCoeffOperator<S>, c: &S) -> Result<ChiResult<S>> {
        if c.is_zero() {
            return Err(Error::ZeroNormalization);
        }
        let v = self.theta_counterterm(op, c)?;
        let chi1 =
            ConstCoeffOperator::from_delta(&v.scale(&(S::one() / c.clone())), &self.sig, &self.m2)?;
        let chi = op.add(&chi1.mul(&self.klein_gordon()));
        debug_assert!(chi.order() <= op.order());
        Ok(ChiResult {
            source: op.clone(),
            chi,
            chi1,
            s: self.counterterm_degree(op),
            provenance: Provenance::ProjectionRoute,
        })
    }

    /// [`chi_explicit`] on `∂_{μ₁}⋯∂_{μ_k}`, with `χ₁` recovered by exact
    /// division.
    pub fn chi_explicit_result(&self, indices: &[usize]) -> Result<ChiResult<S>> {
        let source = ConstCoeffOperator::monomial(indices, &self.sig, &self.m2)?;
        let chi = chi_explicit(indices, &self.sig, &self.m2)?;
        let chi1 = chi.sub(&source).divide_by_klein_gordon().ok_or_else(|| {
            Error::HypothesisFailure(format!("{chi} - {source} is not a multiple of box + m^2"))
        })?;
        Ok(ChiResult {
            s: self.counterterm_degree(&source),
            source,
            chi,
            chi1,
            provenance: Provenance::ExplicitFormula,
        })
    }
}

/// `Θ(S) − Sv` with the default fundamental-solution degree `−2`.
pub fn theta_counterterm<S: Scalar>(op: &ConstCoeffOperator<S>, c: &S) -> Result<DeltaVector<S>> {
    ChiConfig::for_operator(op).theta_counterterm(op, c)
}

/// `χ(S)` and `χ₁(S)` via the kernel projection, with `χ₁(S)δ = c⁻¹(Θ(S) − Sv)`.
pub fn chi_projection<S: Scalar>(op: &ConstCoeffOperator<S>, c: &S) -> Result<ChiResult<S>> {
    ChiConfig::for_operator(op).chi_projection(op, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{imaginary_unit, rational, Gaussian};

    type Op = ConstCoeffOperator<Gaussian>;

    fn mink() -> Signature {
        Signature::default_for(4)
    }

    fn g(a: i64, b: i64) -> Gaussian {
        Gaussian::from_rational(rational(a, b))
    }

    fn mono(ix: &[usize], m2: &Rational) -> Op {
        Op::monomial(ix, &mink(), m2).unwrap()
    }

    #[test]
    fn identity_needs_no_counterterm() {
        let one = Op::one(&mink(), &rational(0, 1));
        assert!(theta_counterterm(&one, &g(1, 1)).unwrap().is_zero());
        let d = mono(&[2], &rational(1, 1));
        let res = chi_projection(&d, &g(1, 1)).unwrap();
        assert_eq!(res.chi, d);
        assert_eq!(res.s, -1);
    }

    #[test]
    fn klein_gordon_is_annihilated() {
        for m2 in [rational(0, 1), rational(1, 1), rational(2, 1)] {
            let kg = Op::klein_gordon(&mink(), &m2);
            for c in [g(1, 1), -imaginary_unit(), g(2, 1)] {
                let v = theta_counterterm(&kg, &c).unwrap();
                assert_eq!(v, DeltaVector::delta(4).scale(&-c.clone()));
                let res = chi_projection(&kg, &c).unwrap();
                assert!(res.chi.is_zero());
                assert_eq!(res.chi1, Op::one(&mink(), &m2).scale(&g(-1, 1)));
            }
        }
    }

    #[test]
    fn second_derivatives_massless() {
        let m2 = rational(0, 1);
        let kg = Op::klein_gordon(&mink(), &m2);
        for mu in 0..4 {
            for nu in 0..4 {
                let s = mono(&[mu, nu], &m2);
                let c = g(3, 1);
                let gmn = if mu == nu { mink().g(mu) } else { 0 };
                let v = theta_counterterm(&s, &c).unwrap();
                assert_eq!(v, DeltaVector::delta(4).scale(&g(-3 * gmn, 4)));
                let res = chi_projection(&s, &c).unwrap();
                assert_eq!(res.chi, s.sub(&kg.scale(&g(gmn, 4))));
            }
        }
    }

    #[test]
    fn text_forms() {
        let m2 = rational(0, 1);
        let res = chi_projection(&mono(&[0, 0], &m2), &g(1, 1)).unwrap();
        assert_eq!(res.to_string(), "d0^2 - 1/4*(box)");
        assert_eq!(res.chi1.to_string(), "-1/4");
        let res = chi_projection(&mono(&[0, 0, 0], &m2), &g(1, 1)).unwrap();
        assert_eq!(res.to_string(), "d0^3 - 1/2*d0*(box)");
        let res = chi_projection(&mono(&[0, 0, 0, 0], &m2), &g(1, 1)).unwrap();
        assert_eq!(
            res.to_string(),
            "d0^4 + (-11/16*d0^2 - 1/16*d1^2 - 1/16*d2^2 - 1/16*d3^2)*(box)"
        );
        let res = chi_projection(&mono(&[1], &m2), &g(1, 1)).unwrap();
        assert_eq!(res.to_string(), "d1");
        assert_eq!(
            Op::wave(&mink(), &m2).to_string(),
            "d0^2 - d1^2 - d2^2 - d3^2"
        );
    }

    #[test]
    fn frozen_massless_values() {
        let m2 = rational(0, 1);
        let p = |ix: &[usize]| chi_projection(&mono(ix, &m2), &g(1, 1)).unwrap().chi1;
        let d = |ix: &[usize]| mono(ix, &m2);
        assert_eq!(p(&[0, 0]), Op::one(&mink(), &m2).scale(&g(-1, 4)));
        assert_eq!(p(&[1, 1]), Op::one(&mink(), &m2).scale(&g(1, 4)));
        assert_eq!(p(&[0, 0, 0]), d(&[0]).scale(&g(-1, 2)));
        assert_eq!(p(&[0, 1, 1]), d(&[0]).scale(&g(1, 6)));
        let spatial = d(&[1, 1]).add(&d(&[2, 2])).add(&d(&[3, 3]));
        assert_eq!(
            p(&[0, 0, 1, 1]),
            d(&[0, 0])
                .scale(&g(5, 48))
                .sub(&d(&[1, 1]).scale(&g(5, 48)))
                .add(&d(&[2, 2]).add(&d(&[3, 3])).scale(&g(1, 48)))
        );
        assert_eq!(
            p(&[0, 0, 0, 0]),
            d(&[0, 0]).scale(&g(-11, 16)).sub(&spatial.scale(&g(1, 16)))
        );
    }

    #[test]
    fn massless_contraction_and_linearity() {
        let m2 = rational(0, 1);
        let cfg = ChiConfig::<Gaussian>::new(mink(), m2.clone());
        let one = g(1, 1);
        let mut trace = Op::zero(&mink(), &m2);
        for mu in 0..4 {
            let r = cfg.chi_projection(&mono(&[mu, mu], &m2), &one).unwrap();
            trace = trace.add(&r.chi.scale(&g(mink().g(mu), 1)));
        }
        assert!(trace.is_zero());
        let pairs: [(&[usize], &[usize]); 3] = [
            (&[0, 0], &[1, 2]),
            (&[0, 1, 1], &[2]),
            (&[0, 0, 0, 0], &[0, 3]),
        ];
        for (a, b) in pairs {
            let (sa, sb) = (mono(a, &m2).scale(&g(2, 3)), mono(b, &m2));
            let sum = cfg.chi_projection(&sa.add(&sb), &one).unwrap().chi;
            let parts = cfg
                .chi_projection(&sa, &one)
                .unwrap()
                .chi
                .add(&cfg.chi_projection(&sb, &one).unwrap().chi);
            assert_eq!(sum, parts);
        }
    }

    #[test]
    fn massive_second_derivative_differs_from_the_closed_form() {
        let m2 = rational(1, 1);
        let res = chi_projection(&mono(&[0, 0], &m2), &g(1, 1)).unwrap();
        assert_eq!(res.chi1, Op::one(&mink(), &m2).scale(&g(-2, 9)));
        let closed = chi_explicit::<Gaussian>(&[0, 0], &mink(), &m2).unwrap();
        assert_ne!(res.chi, closed);
    }

    #[test]
    fn zero_normalization_is_rejected() {
        let s = mono(&[0, 0], &rational(0, 1));
        assert_eq!(chi_projection(&s, &g(0, 1)), Err(Error::ZeroNormalization));
    }

    #[test]
    fn mismatched_configuration() {
        let cfg = ChiConfig::<Gaussian>::new(mink(), rational(0, 1));
        let s = mono(&[0, 0], &rational(1, 1));
        assert!(matches!(
            cfg.chi_projection(&s, &g(1, 1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn other_fundamental_solution_degree() {
        let m2 = rational(0, 1);
        let cfg = ChiConfig::<Gaussian>::with_degree(mink(), m2.clone(), -3);
        let res = cfg.chi_projection(&mono(&[0, 0], &m2), &g(1, 1)).unwrap();
        assert_eq!(res.s, -1);
        assert!(res.chi1.is_zero());
    }

    #[test]
    fn division_by_klein_gordon() {
        let m2 = rational(2, 1);
        let kg = Op::klein_gordon(&mink(), &m2);
        let p = mono(&[0, 1, 3], &m2).add(&mono(&[2, 2], &m2).scale(&g(-5, 2)));
        assert_eq!(p.mul(&kg).divide_by_klein_gordon(), Some(p.clone()));
        assert_eq!(p.divide_by_klein_gordon(), None);
        let flipped = mink().flipped();
        let kg = Op::klein_gordon(&flipped, &m2);
        let q = Op::monomial(&[1, 1, 2], &flipped, &m2).unwrap();
        assert_eq!(q.mul(&kg).divide_by_klein_gordon(), Some(q));
    }
}
