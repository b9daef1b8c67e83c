//! Restrictions `Q|_r : D'({0})_{≤r} → D'({0})_{≤r+q}` as exact matrices,
//! their adjoints for `(·|·)_r`, and the polynomial projections onto kernels.

use crate::deltaspace::{basis, inner_unchecked, smap, tmap, DeltaVector, MultiIndex};
use crate::error::{Error, Result};
use crate::linalg::{minimal_polynomial as matrix_minimal_polynomial, Matrix, UniPoly};
use crate::opalg::{essential_order, OperatorExpr};
use crate::scalar::Scalar;

/// Matrix of a linear map `D'({0})_{≤r_domain} → D'({0})_{≤r_codomain}` in the
/// graded-lex bases of both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionMatrix<S> {
    pub n: usize,
    pub r_domain: i64,
    pub r_codomain: i64,
    pub matrix: Matrix<S>,
    pub provenance: String,
}

impl<S: Scalar> RestrictionMatrix<S> {
    pub fn new(
        n: usize,
        r_domain: i64,
        r_codomain: i64,
        matrix: Matrix<S>,
        provenance: String,
    ) -> Self {
        debug_assert_eq!(matrix.cols(), basis(n, r_domain).len());
        debug_assert_eq!(matrix.rows(), basis(n, r_codomain).len());
        RestrictionMatrix {
            n,
            r_domain,
            r_codomain,
            matrix,
            provenance,
        }
    }

    pub fn domain_basis(&self) -> Vec<MultiIndex> {
        basis(self.n, self.r_domain)
    }

    pub fn codomain_basis(&self) -> Vec<MultiIndex> {
        basis(self.n, self.r_codomain)
    }

    pub fn is_square(&self) -> bool {
        self.r_domain == self.r_codomain
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn apply(&self, v: &DeltaVector<S>) -> Result<DeltaVector<S>> {
        check_vector(self.n, self.r_domain, v)?;
        let x = self.matrix.mul_vec(&v.to_coords(&self.domain_basis()));
        Ok(DeltaVector::from_coords(self.n, &self.codomain_basis(), &x))
    }

    /// Adjoint for `(·|·)_{r_codomain}` and `(·|·)_{r_domain}`:
    /// `(A*)_{αβ} = conj(A_{βα}) β!/α!`.
    pub fn adjoint(&self) -> Self {
        let dom = self.domain_basis();
        let cod = self.codomain_basis();
        let mut m = Matrix::zeros(dom.len(), cod.len());
        for (i, alpha) in dom.iter().enumerate() {
            let fa = S::from_bigint(alpha.factorial());
            for (j, beta) in cod.iter().enumerate() {
                let a = &self.matrix[(j, i)];
                if !a.is_zero() {
                    m[(i, j)] = a.conj() * S::from_bigint(beta.factorial()) / fa.clone();
                }
            }
        }
        RestrictionMatrix::new(
            self.n,
            self.r_codomain,
            self.r_domain,
            m,
            format!("adjoint of {}", self.provenance),
        )
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(
            self.r_domain, other.r_codomain,
            "degree mismatch in composition"
        );
        RestrictionMatrix::new(
            self.n,
            other.r_domain,
            self.r_codomain,
            self.matrix.mul(&other.matrix),
            format!("({}) * ({})", self.provenance, other.provenance),
        )
    }

    /// `A*A = AA*` for the weighted adjoint; only square maps can be normal.
    pub fn is_normal(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let adj = self.adjoint().matrix;
        adj.mul(&self.matrix) == self.matrix.mul(&adj)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.is_square() && self.adjoint().matrix == self.matrix
    }
}

fn check_vector<S: Scalar>(n: usize, r: i64, v: &DeltaVector<S>) -> Result<()> {
    v.check_dim(n)?;
    v.check_degree(r)
}

/// `Q|_r`, with codomain degree `r + q` for the essential order `q`.
pub fn restrict<S: Scalar>(q: &OperatorExpr<S>, r: i64) -> RestrictionMatrix<S> {
    let eo = essential_order(q, r.max(0) as u32);
    restrict_between(q, r, r + eo.q as i64)
}

/// Matrix of `Q` from degree `r_domain` into degree `r_codomain`; images are
/// truncated to the codomain, which is lossless whenever
/// `r_codomain ≥ r_domain + q`.
pub fn restrict_between<S: Scalar>(
    q: &OperatorExpr<S>,
    r_domain: i64,
    r_codomain: i64,
) -> RestrictionMatrix<S> {
    let n = q.dim();
    let dom = basis(n, r_domain);
    let cod = basis(n, r_codomain);
    let columns: Vec<Vec<S>> = dom
        .iter()
        .map(|alpha| q.apply_delta_basis(alpha).to_coords(&cod))
        .collect();
    RestrictionMatrix::new(
        n,
        r_domain,
        r_codomain,
        Matrix::from_columns(cod.len(), &columns),
        q.to_string(),
    )
}

/// `(Q|_r)* = T_r Q̄^t S_{r+q}`, computed column by column on polynomials.
pub fn adjoint_restriction<S: Scalar>(q: &OperatorExpr<S>, r: i64) -> RestrictionMatrix<S> {
    let n = q.dim();
    let eo = essential_order(q, r.max(0) as u32);
    let top = r + eo.q as i64;
    let qt = q.conj().transpose();
    let dom = basis(n, r);
    let cod = basis(n, top);
    let columns: Vec<Vec<S>> = cod
        .iter()
        .map(|beta| {
            let f = smap(top, &DeltaVector::basis(beta.clone())).expect("degree within range");
            let g = qt.apply_poly(&f).expect("matching dimension");
            tmap(r, &g).to_coords(&dom)
        })
        .collect();
    RestrictionMatrix::new(
        n,
        top,
        r,
        Matrix::from_columns(dom.len(), &columns),
        format!("adjoint of {q}"),
    )
}

/// Monic minimal polynomial of a square restriction.
pub fn minimal_polynomial<S: Scalar>(m: &RestrictionMatrix<S>) -> Result<UniPoly<S>> {
    if !m.is_square() {
        return Err(Error::Precondition(format!(
            "minimal polynomial needs a square map, got degrees {} -> {}",
            m.r_domain, m.r_codomain
        )));
    }
    Ok(matrix_minimal_polynomial(&m.matrix))
}

/// `p(z) = g(z)/g(0)` where `g` is the minimal polynomial of `b` with one
/// factor `z` removed. For diagonalizable `b`, `p(b)` is the spectral
/// projection onto `ker b`.
pub fn kernel_projection_polynomial<S: Scalar>(b: &Matrix<S>) -> UniPoly<S> {
    projection_from_minimal(matrix_minimal_polynomial(b))
}

fn projection_from_minimal<S: Scalar>(m: UniPoly<S>) -> UniPoly<S> {
    let g = if m.coeff(0).is_zero() {
        UniPoly::new(m.coeffs()[1..].to_vec())
    } else {
        m
    };
    g.scale(&(S::one() / g.coeff(0)))
}

/// `h(z) = (p(z) − 1)/z`, so that `p(z) = 1 + z·h(z)`.
pub(crate) fn tail<S: Scalar>(p: &UniPoly<S>) -> UniPoly<S> {
    UniPoly::new(p.coeffs().iter().skip(1).cloned().collect())
}

/// Everything needed to project residues for one `(Q, r)`.
#[derive(Clone, Debug)]
pub struct ProjectionData<S> {
    /// `Q|_r`
    pub restriction: RestrictionMatrix<S>,
    /// `(Q|_r)*`
    pub adjoint: RestrictionMatrix<S>,
    /// `B = (Q|_r)*(Q|_r)` on `D'({0})_{≤r}`
    pub gram: Matrix<S>,
    pub minimal_polynomial: UniPoly<S>,
    pub projection_polynomial: UniPoly<S>,
}

impl<S: Scalar> ProjectionData<S> {
    pub fn new(restriction: RestrictionMatrix<S>) -> Self {
        let adjoint = restriction.adjoint();
        let gram = adjoint.matrix.mul(&restriction.matrix);
        let minimal_polynomial = matrix_minimal_polynomial(&gram);
        let projection_polynomial = projection_from_minimal(minimal_polynomial.clone());
        ProjectionData {
            restriction,
            adjoint,
            gram,
            minimal_polynomial,
            projection_polynomial,
        }
    }

    pub fn of(q: &OperatorExpr<S>, r: i64) -> Self {
        Self::new(restrict(q, r))
    }

    /// `v = Σ_{k≥1} c_k B^{k−1} A* w` for `p = 1 + Σ c_k z^k`.
    pub fn counterterm(&self, w: &DeltaVector<S>) -> Result<DeltaVector<S>> {
        let a = &self.restriction;
        check_vector(a.n, a.r_codomain, w)?;
        let aw = self
            .adjoint
            .matrix
            .mul_vec(&w.to_coords(&a.codomain_basis()));
        let v = tail(&self.projection_polynomial).eval_on_vector(&self.gram, &aw);
        Ok(DeltaVector::from_coords(a.n, &a.domain_basis(), &v))
    }

    /// `w + A v` for the counterterm `v`, i.e. `p(AA*) w`.
    pub fn corrected_residue(&self, w: &DeltaVector<S>) -> Result<DeltaVector<S>> {
        let v = self.counterterm(w)?;
        Ok(w + &self.restriction.apply(&v)?)
    }

    /// `p(B)`, the orthogonal projection onto `ker Q|_r`.
    pub fn kernel_projector(&self) -> RestrictionMatrix<S> {
        let r = self.restriction.r_domain;
        RestrictionMatrix::new(
            self.restriction.n,
            r,
            r,
            self.projection_polynomial.eval_matrix(&self.gram),
            format!("kernel projector of {}", self.restriction.provenance),
        )
    }
}

/// `p_r` for `Q` at degree `r`.
pub fn projection_polynomial<S: Scalar>(q: &OperatorExpr<S>, r: i64) -> UniPoly<S> {
    ProjectionData::of(q, r).projection_polynomial
}

/// `p_r((Q|_r)*Q|_r)`
pub fn projector_onto_kernel<S: Scalar>(q: &OperatorExpr<S>, r: i64) -> RestrictionMatrix<S> {
    ProjectionData::of(q, r).kernel_projector()
}

pub fn kernel_basis<S: Scalar>(m: &RestrictionMatrix<S>) -> Vec<DeltaVector<S>> {
    let dom = m.domain_basis();
    m.matrix
        .nullspace()
        .iter()
        .map(|v| DeltaVector::from_coords(m.n, &dom, v))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum RangeMembership<S> {
    /// `v` with `Mv = w`.
    Preimage(DeltaVector<S>),
    /// `u ∈ ker M*` with `(u|w) ≠ 0`.
    Obstruction(DeltaVector<S>),
}

impl<S> RangeMembership<S> {
    pub fn is_member(&self) -> bool {
        matches!(self, RangeMembership::Preimage(_))
    }

    pub fn certificate(&self) -> &DeltaVector<S> {
        match self {
            RangeMembership::Preimage(v) | RangeMembership::Obstruction(v) => v,
        }
    }
}

/// Decides `w ∈ Ran M` by exact elimination.
pub fn range_membership<S: Scalar>(
    m: &RestrictionMatrix<S>,
    w: &DeltaVector<S>,
) -> Result<RangeMembership<S>> {
    check_vector(m.n, m.r_codomain, w)?;
    let coords = w.to_coords(&m.codomain_basis());
    if let Some(x) = m.matrix.solve(&coords) {
        return Ok(RangeMembership::Preimage(DeltaVector::from_coords(
            m.n,
            &m.domain_basis(),
            &x,
        )));
    }
    let witness = kernel_basis(&m.adjoint())
        .into_iter()
        .find(|u| !inner_unchecked(u, w).is_zero())
        .expect("a vector outside the range has a non-orthogonal adjoint kernel vector");
    Ok(RangeMembership::Obstruction(witness))
}

/// `M⁺ w` for normal `M`: the exact solution of `Mv = P w` of least norm,
/// with `P` the orthogonal projection onto `Ran M`. Non-normal maps are
/// rejected; [`range_membership`] is the fallback for them.
pub fn pseudoinverse_correction<S: Scalar>(
    m: &RestrictionMatrix<S>,
    w: &DeltaVector<S>,
) -> Result<DeltaVector<S>> {
    if !m.is_normal() {
        return Err(Error::NonNormal);
    }
    let data = ProjectionData::new(m.clone());
    Ok(data.counterterm(w)?.scale(&-S::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltaspace::{enumerate, inner};
    use crate::opalg::{dalembert, euler, parity, Signature};
    use crate::scalar::{rational, Gaussian, Rational};

    type D = DeltaVector<Rational>;

    fn q(a: i64) -> Rational {
        rational(a, 1)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn diag_restriction(entries: &[Rational], n: usize, r: i64) -> RestrictionMatrix<Rational> {
        RestrictionMatrix::new(n, r, r, Matrix::diagonal(entries), "diag".into())
    }

    #[test]
    fn euler_restrictions_are_diagonal() {
        let m = restrict(&euler::<Rational>(1, q(-2)), 1);
        assert_eq!(m.matrix, Matrix::diagonal(&[q(1), q(0)]));
        assert_eq!(m.adjoint().matrix, m.matrix);
        assert_eq!(
            adjoint_restriction(&euler::<Rational>(1, q(-2)), 1).matrix,
            m.matrix
        );
    }

    #[test]
    fn parity_defect_restriction() {
        let id = OperatorExpr::<Rational>::identity(1);
        let m = restrict(&id.sub(&parity(1)), 1);
        assert_eq!(m.matrix, Matrix::diagonal(&[q(0), q(2)]));
    }

    #[test]
    fn klein_gordon_restriction_and_adjoint() {
        let sig = Signature::new(vec![1]).unwrap();
        let m2 = q(3);
        let kg = dalembert::<Rational>(1, m2.clone(), &sig);
        let m = restrict(&kg, 0);
        assert_eq!((m.r_domain, m.r_codomain), (0, 2));
        assert_eq!(m.matrix.column(0), vec![m2.clone(), q(0), q(1)]);
        let a = adjoint_restriction(&kg, 0);
        assert_eq!(a.matrix.row(0), &[m2, q(0), q(2)]);
        assert_eq!(
            a,
            RestrictionMatrix {
                provenance: a.provenance.clone(),
                ..m.adjoint()
            }
        );
    }

    #[test]
    fn adjoint_identity_on_mixed_operator() {
        let n = 2;
        let x0 = OperatorExpr::<Gaussian>::coordinate(n, 0);
        let d1 = OperatorExpr::<Gaussian>::partial(n, 1);
        let i = crate::scalar::imaginary_unit();
        let op = x0
            .compose(&d1)
            .compose(&d1)
            .scale(&i)
            .add(&d1.pow(2))
            .add(&parity(n));
        for r in 0..=2 {
            let a = restrict(&op, r);
            let adj = adjoint_restriction(&op, r);
            for alpha in enumerate(n, r as u32 + 1) {
                let v = DeltaVector::basis(alpha).scale(&Gaussian::new(q(1), q(2)));
                for beta in basis(n, r) {
                    let w = DeltaVector::basis(beta);
                    let lhs = inner(a.r_codomain, &v, &a.apply(&w).unwrap()).unwrap();
                    let rhs = inner(r, &adj.apply(&v).unwrap(), &w).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn minimal_polynomials() {
        let id = diag_restriction(&[q(1), q(1)], 1, 1);
        assert_eq!(minimal_polynomial(&id).unwrap().coeffs(), &[q(-1), q(1)]);
        let e = restrict(&euler::<Rational>(4, q(-6)), 2);
        let b = e.adjoint().compose(&e);
        let p = minimal_polynomial(&b).unwrap();
        // roots 0, 1, 4
        assert_eq!(p.coeffs(), &[q(0), q(4), q(-5), q(1)]);
        assert!(p.is_squarefree());
        let rect = restrict(
            &dalembert::<Rational>(1, q(0), &Signature::new(vec![1]).unwrap()),
            0,
        );
        assert!(minimal_polynomial(&rect).is_err());
    }

    #[test]
    fn projection_polynomials() {
        assert_eq!(
            projection_polynomial(&euler::<Rational>(1, q(-2)), 1).coeffs(),
            &[q(1), q(-1)]
        );
        assert_eq!(
            projection_polynomial(&euler::<Rational>(1, rational(-1, 2)), 0).coeffs(),
            &[q(1), q(-4)]
        );
        let id = OperatorExpr::<Rational>::identity(1);
        assert_eq!(
            projection_polynomial(&id.sub(&parity(1)), 0).coeffs(),
            &[q(1)]
        );
    }

    #[test]
    fn kernel_projectors() {
        let p = projector_onto_kernel(&euler::<Rational>(1, q(-2)), 1);
        assert_eq!(p.matrix, Matrix::diagonal(&[q(0), q(1)]));
        let p = projector_onto_kernel(&euler::<Rational>(2, q(1)), 2);
        assert!(p.is_zero());
        let id = OperatorExpr::<Rational>::identity(1);
        let p = projector_onto_kernel(&id.sub(&parity(1)), 0);
        assert_eq!(p.matrix, Matrix::identity(1));
    }

    #[test]
    fn kernels_and_ranges() {
        let r0 = restrict(&euler::<Rational>(1, q(-1)), 0);
        let res = range_membership(&r0, &D::delta(1)).unwrap();
        assert_eq!(res, RangeMembership::Obstruction(D::delta(1)));
        let half = restrict(&euler::<Rational>(1, rational(-1, 2)), 0);
        let res = range_membership(&half, &D::delta(1)).unwrap();
        assert_eq!(res, RangeMembership::Preimage(D::delta(1).scale(&q(-2))));
        let k = kernel_basis(&restrict(&euler::<Rational>(4, q(-6)), 2));
        assert_eq!(k.len(), 10);
        assert!(k.iter().all(|v| v.terms().all(|(a, _)| a.order() == 2)));
        assert!(matches!(
            range_membership(&r0, &D::basis(mi(&[1]))),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn pseudoinverse() {
        let m = diag_restriction(&[q(1), q(0)], 1, 1);
        assert_eq!(
            pseudoinverse_correction(&m, &D::delta(1)).unwrap(),
            D::delta(1)
        );
        assert!(pseudoinverse_correction(&m, &D::basis(mi(&[1])))
            .unwrap()
            .is_zero());
        let m = diag_restriction(&[rational(-1, 2)], 1, 0);
        let beta = rational(7, 3);
        assert_eq!(
            pseudoinverse_correction(&m, &D::delta(1).scale(&beta)).unwrap(),
            D::delta(1).scale(&(q(-2) * beta))
        );
        let nilpotent = RestrictionMatrix::new(
            1,
            1,
            1,
            Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(0), q(0)]]).unwrap(),
            "nil".into(),
        );
        assert_eq!(
            pseudoinverse_correction(&nilpotent, &D::delta(1)),
            Err(Error::NonNormal)
        );
    }
}
