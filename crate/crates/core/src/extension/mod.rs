//! On-shell extensions described through their residues.
//!
//! An extension `u̇` of a distribution on `ℝⁿ∖{0}` enters every statement
//! here only through its degree `r` and the residues `Qu̇ ∈ D'({0})` of the
//! operators `Q` it should satisfy. Counterterms are delta vectors `v` of
//! degree `≤ r`; adding one maps each residue `w_Q` to `w_Q + Qv`.

mod casimir;

use std::fmt;

use crate::degree::DegreeBound;
use crate::deltaspace::{basis, DeltaVector, MultiIndex};
use crate::error::{Error, Result};
use crate::opalg::{essential_order, euler, OperatorExpr};
use crate::scalar::{Rational, Scalar};
use crate::spectral::{kernel_basis, range_membership, restrict, ProjectionData, RangeMembership};

pub use casimir::{
    casimir_correction, renorm_map, verify_casimir_hypotheses, CasimirReport, CasimirSpec,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionRecord<S> {
    pub n: usize,
    /// Integer degree of divergence; see [`ExtensionRecord::from_degree`].
    pub r: i64,
    /// The unfloored degree when it was not an integer.
    pub original_degree: Option<Rational>,
    residues: Vec<(OperatorExpr<S>, DeltaVector<S>)>,
}

impl<S: Scalar> ExtensionRecord<S> {
    pub fn new(n: usize, r: i64) -> Self {
        ExtensionRecord {
            n,
            r,
            original_degree: None,
            residues: Vec::new(),
        }
    }

    /// Rational degrees are floored: `D'({0})_{≤r}` only sees `⌊deg u⌋`.
    pub fn from_degree(n: usize, degree: &Rational) -> Self {
        let b = DegreeBound::from_rational(degree);
        let mut rec = Self::new(n, b.value.finite().expect("finite degree"));
        rec.original_degree = b.original;
        rec
    }

    /// Registers `Qu̇ = w`, replacing any earlier entry for the same operator.
    pub fn with_residue(mut self, q: OperatorExpr<S>, w: DeltaVector<S>) -> Result<Self> {
        if q.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: q.dim(),
            });
        }
        w.check_dim(self.n)?;
        let top = self.r + essential_order(&q, self.r.max(0) as u32).q as i64;
        w.check_degree(top)?;
        match self.residues.iter_mut().find(|(p, _)| *p == q) {
            Some(entry) => entry.1 = w,
            None => self.residues.push((q, w)),
        }
        Ok(self)
    }

    pub fn residue(&self, q: &OperatorExpr<S>) -> Option<&DeltaVector<S>> {
        self.residues.iter().find(|(p, _)| p == q).map(|(_, w)| w)
    }

    pub fn residues(&self) -> impl Iterator<Item = (&OperatorExpr<S>, &DeltaVector<S>)> {
        self.residues.iter().map(|(q, w)| (q, w))
    }

    pub(crate) fn require(&self, q: &OperatorExpr<S>) -> Result<&DeltaVector<S>> {
        self.residue(q)
            .ok_or_else(|| Error::MissingResidue(q.to_string()))
    }
}

/// Which of the equivalent existence conditions decided the question.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// The residue was solved for exactly: `Qu̇ ∈ Ran(Q|_r)`.
    RangeMembership,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::RangeMembership => write!(f, "residue in Ran(Q|_r)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceReport<S> {
    pub exists: bool,
    /// A preimage of the residue when `exists`, otherwise a vector in
    /// `ker (Q|_r)*` not orthogonal to the residue.
    pub certificate: DeltaVector<S>,
    pub criterion: Criterion,
}

/// Decides whether an extension with `Qü = 0` and the same degree exists.
pub fn existence_check<S: Scalar>(
    rec: &ExtensionRecord<S>,
    q: &OperatorExpr<S>,
) -> Result<ExistenceReport<S>> {
    let w = rec.require(q)?;
    let m = restrict(q, rec.r);
    let (exists, certificate) = match range_membership(&m, w)? {
        RangeMembership::Preimage(v) => (true, v),
        RangeMembership::Obstruction(u) => (false, u),
    };
    Ok(ExistenceReport {
        exists,
        certificate,
        criterion: Criterion::RangeMembership,
    })
}

/// Counterterm `v = Σ_{k≥1} c_k B^{k−1}(Q|_r)* w` for `p_r = 1 + Σ c_k z^k`,
/// `B = (Q|_r)*Q|_r` and `w = Qu̇`. The corrected residue `w + Q|_r v` is the
/// orthogonal projection of `w` onto `(Ran Q|_r)^⊥`, so it vanishes exactly
/// when an on-shell extension exists.
pub fn onshell_correction<S: Scalar>(
    rec: &ExtensionRecord<S>,
    q: &OperatorExpr<S>,
) -> Result<DeltaVector<S>> {
    let w = rec.require(q)?;
    ProjectionData::of(q, rec.r).counterterm(w)
}

/// `u̇ ↦ u̇ + v`, updating every registered residue.
pub fn apply_counterterm<S: Scalar>(
    rec: &ExtensionRecord<S>,
    v: &DeltaVector<S>,
) -> Result<ExtensionRecord<S>> {
    v.check_dim(rec.n)?;
    v.check_degree(rec.r)?;
    let mut out = rec.clone();
    for (q, w) in out.residues.iter_mut() {
        *w = &*w + &q.apply_delta(v)?;
    }
    Ok(out)
}

/// Counterterm after which `R^{k+1}` annihilates the extension, for `R` of
/// essential order 0 with `R|_r` normal. Uses the residue of `R^k`; `k = 0`
/// is the plain on-shell correction for `R`.
pub fn order_raising_correction<S: Scalar>(
    rec: &ExtensionRecord<S>,
    r_op: &OperatorExpr<S>,
    k: u32,
) -> Result<DeltaVector<S>> {
    let eo = essential_order(r_op, rec.r.max(0) as u32);
    if eo.q != 0 {
        return Err(Error::NotOrderZero(eo.q));
    }
    if !restrict(r_op, rec.r).is_normal() {
        return Err(Error::NonNormal);
    }
    if k == 0 {
        return onshell_correction(rec, r_op);
    }
    let rk = r_op.pow(k);
    let w = rec.require(&rk)?;
    ProjectionData::of(&rk, rec.r).counterterm(w)
}

/// Applies the on-shell correction of each operator in turn. The operators
/// must commute pairwise.
pub fn multi_commuting_correction<S: Scalar>(
    rec: &ExtensionRecord<S>,
    qs: &[OperatorExpr<S>],
) -> Result<DeltaVector<S>> {
    for (i, a) in qs.iter().enumerate() {
        for (j, b) in qs.iter().enumerate().skip(i + 1) {
            let c = a.commutator(b);
            if !c.is_zero() {
                return Err(Error::NonCommuting {
                    first: i,
                    second: j,
                    commutator: c.to_string(),
                });
            }
        }
    }
    for q in qs {
        rec.require(q)?;
    }
    let mut current = rec.clone();
    let mut total = DeltaVector::zero(rec.n);
    for q in qs {
        let v = onshell_correction(&current, q)?;
        current = apply_counterterm(&current, &v)?;
        total = &total + &v;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousReport {
    pub unique: bool,
    /// Orders `|α| ≤ r` at which `−(|α| + n + a)` vanishes.
    pub kernel_levels: Vec<u32>,
}

/// Whether a homogeneous distribution of degree `a` has a unique homogeneous
/// extension at degree `r`: `det R(a)|_r ≠ 0`.
pub fn homogeneous_extension_unique<S: Scalar>(n: usize, a: S, r: i64) -> HomogeneousReport {
    let m = restrict(&euler(n, a), r);
    let unique = m.matrix.det() != S::zero();
    let mut kernel_levels: Vec<u32> = kernel_basis(&m)
        .iter()
        .filter_map(|v| v.terms().map(|(alpha, _)| alpha.order()).max())
        .collect();
    kernel_levels.sort_unstable();
    kernel_levels.dedup();
    HomogeneousReport {
        unique,
        kernel_levels,
    }
}

/// Whether `Q^t` sends every monomial of degree `≤ r + q` to a polynomial of
/// degree `≤ r`.
pub fn linearity_precondition<S: Scalar>(q: &OperatorExpr<S>, r: i64) -> bool {
    let top = r + essential_order(q, r.max(0) as u32).q as i64;
    let qt = q.transpose();
    basis(q.dim(), top).into_iter().all(|beta: MultiIndex| {
        let f = crate::deltaspace::Polynomial::monomial(beta, S::one());
        let g = qt.apply_poly(&f).expect("matching dimension");
        g.total_degree() <= crate::degree::Degree::Finite(r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{dalembert, Signature};
    use crate::scalar::{rational, Gaussian};

    type D = DeltaVector<Rational>;
    type Op = OperatorExpr<Rational>;

    fn q(a: i64) -> Rational {
        rational(a, 1)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn fp_record(c: Rational) -> (ExtensionRecord<Rational>, Op) {
        let r = euler::<Rational>(1, q(-1));
        let rec = ExtensionRecord::new(1, 0)
            .with_residue(r.clone(), D::delta(1).scale(&c))
            .unwrap();
        (rec, r)
    }

    #[test]
    fn existence_examples() {
        let (rec, r) = fp_record(q(3));
        let rep = existence_check(&rec, &r).unwrap();
        assert!(!rep.exists);
        assert_eq!(rep.certificate, D::delta(1));

        let half = euler::<Rational>(1, rational(-1, 2));
        let beta = rational(5, 7);
        let rec = ExtensionRecord::new(1, 0)
            .with_residue(half.clone(), D::delta(1).scale(&beta))
            .unwrap();
        let rep = existence_check(&rec, &half).unwrap();
        assert!(rep.exists);
        assert_eq!(rep.certificate, D::delta(1).scale(&(q(-2) * beta.clone())));

        let v = onshell_correction(&rec, &half).unwrap();
        assert_eq!(v, D::delta(1).scale(&(q(2) * beta)));
        let fixed = apply_counterterm(&rec, &v).unwrap();
        assert!(fixed.residue(&half).unwrap().is_zero());

        let rec = ExtensionRecord::new(1, 0)
            .with_residue(half.clone(), D::zero(1))
            .unwrap();
        let rep = existence_check(&rec, &half).unwrap();
        assert!(rep.exists && rep.certificate.is_zero());
        assert!(onshell_correction(&rec, &half).unwrap().is_zero());
        assert!(matches!(
            existence_check(&rec, &euler(1, q(0))),
            Err(Error::MissingResidue(_))
        ));
    }

    #[test]
    fn residues_above_the_allowed_degree_are_rejected() {
        let r = euler::<Rational>(1, q(-1));
        assert!(matches!(
            ExtensionRecord::new(1, 0).with_residue(r, D::basis(mi(&[1]))),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn fp_model_has_no_onshell_extension_but_raises_order() {
        let (rec, r) = fp_record(q(-4));
        let v = onshell_correction(&rec, &r).unwrap();
        assert!(v.is_zero());
        let v = order_raising_correction(&rec, &r, 1).unwrap();
        assert!(v.is_zero());
        let corrected = apply_counterterm(&rec, &v).unwrap();
        let r2_residue = r.apply_delta(corrected.residue(&r).unwrap()).unwrap();
        assert!(r2_residue.is_zero());
        assert_eq!(
            order_raising_correction(&rec, &r, 0).unwrap(),
            onshell_correction(&rec, &r).unwrap()
        );
    }

    #[test]
    fn order_raising_in_kernel_direction() {
        let r = euler::<Rational>(1, q(-2));
        let rec = ExtensionRecord::new(1, 1)
            .with_residue(r.clone(), D::basis(mi(&[1])).scale(&q(3)))
            .unwrap();
        let v = order_raising_correction(&rec, &r, 1).unwrap();
        assert!(v.is_zero());
        assert!(r.apply_delta(rec.residue(&r).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn order_raising_rejects_positive_order() {
        let sig = Signature::new(vec![1]).unwrap();
        let kg = dalembert::<Rational>(1, q(0), &sig);
        let rec = ExtensionRecord::new(1, 0);
        assert_eq!(
            order_raising_correction(&rec, &kg, 1),
            Err(Error::NotOrderZero(2))
        );
    }

    #[test]
    fn commuting_eulers() {
        let n = 2;
        let a = euler::<Rational>(n, rational(1, 2));
        let b = euler::<Rational>(n, rational(-7, 3));
        let u: D = D::from_terms(
            n,
            basis(n, 2)
                .into_iter()
                .enumerate()
                .map(|(i, al)| (al, q(i as i64 + 1))),
        );
        let rec = ExtensionRecord::new(n, 2)
            .with_residue(a.clone(), a.apply_delta(&u).unwrap())
            .unwrap()
            .with_residue(b.clone(), b.apply_delta(&u).unwrap())
            .unwrap();
        let v = multi_commuting_correction(&rec, &[a.clone(), b.clone()]).unwrap();
        let fixed = apply_counterterm(&rec, &v).unwrap();
        assert!(fixed.residue(&a).unwrap().is_zero());
        assert!(fixed.residue(&b).unwrap().is_zero());
        assert_eq!(
            multi_commuting_correction(&rec, std::slice::from_ref(&a)).unwrap(),
            onshell_correction(&rec, &a).unwrap()
        );
    }

    #[test]
    fn counterterm_updates_every_residue() {
        let n = 1;
        let a = euler::<Rational>(n, q(1));
        let b = euler::<Rational>(n, q(-3));
        let rec = ExtensionRecord::new(n, 1)
            .with_residue(a.clone(), D::delta(1))
            .unwrap()
            .with_residue(b.clone(), D::basis(mi(&[1])))
            .unwrap();
        let v = onshell_correction(&rec, &a).unwrap();
        let fixed = apply_counterterm(&rec, &v).unwrap();
        assert_eq!(
            fixed.residue(&b).unwrap(),
            &(&D::basis(mi(&[1])) + &b.apply_delta(&v).unwrap())
        );
        assert!(matches!(
            apply_counterterm(&rec, &D::basis(mi(&[2]))),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn non_commuting_pair_is_reported() {
        let x = Op::coordinate(1, 0);
        let d = Op::partial(1, 0);
        let rec = ExtensionRecord::new(1, 1)
            .with_residue(x.clone(), D::zero(1))
            .unwrap()
            .with_residue(d.clone(), D::zero(1))
            .unwrap();
        match multi_commuting_correction(&rec, &[d, x]) {
            Err(Error::NonCommuting {
                first: 0,
                second: 1,
                commutator,
            }) => assert_eq!(commutator, "1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn homogeneous_uniqueness() {
        let rep = homogeneous_extension_unique(4, q(-3), 5);
        assert!(rep.unique && rep.kernel_levels.is_empty());
        let rep = homogeneous_extension_unique(4, q(-6), 2);
        assert_eq!(
            rep,
            HomogeneousReport {
                unique: false,
                kernel_levels: vec![2]
            }
        );
        let rep = homogeneous_extension_unique(1, q(-1), 0);
        assert_eq!(
            rep,
            HomogeneousReport {
                unique: false,
                kernel_levels: vec![0]
            }
        );
        let rep = homogeneous_extension_unique(2, Gaussian::new(q(-3), q(1)), 3);
        assert!(rep.unique);
    }

    #[test]
    fn linearity_preconditions() {
        for r in 0..4 {
            assert!(linearity_precondition(
                &euler::<Rational>(3, rational(2, 3)),
                r
            ));
            let sig = Signature::default_for(2);
            assert!(linearity_precondition(
                &dalembert::<Rational>(2, q(0), &sig),
                r
            ));
            assert!(!linearity_precondition(
                &dalembert::<Rational>(2, q(1), &sig),
                r
            ));
        }
    }

    #[test]
    fn rational_degrees_are_floored() {
        let rec = ExtensionRecord::<Rational>::from_degree(2, &rational(-1, 2));
        assert_eq!(rec.r, -1);
        assert_eq!(rec.original_degree, Some(rational(-1, 2)));
    }
}
