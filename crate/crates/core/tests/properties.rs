use proptest::prelude::*;

use onshell_core::chi::{ChiConfig, ConstCoeffOperator};
use onshell_core::degree::{bound_operator, deg_delta, DegreeBound};
use onshell_core::deltaspace::{
    basis, enumerate, inner, pair, smap, tmap, DeltaVector, MultiIndex, Polynomial,
};
use onshell_core::extension::{apply_counterterm, onshell_correction, ExtensionRecord};
use onshell_core::opalg::{
    essential_order, euler, normal_form, OperatorExpr, RatMatrix, Signature,
};
use onshell_core::scalar::{gaussian, rational, Gaussian, Scalar};
use onshell_core::spectral::{adjoint_restriction, restrict, ProjectionData};

type Op = OperatorExpr<Gaussian>;
type D = DeltaVector<Gaussian>;

const N: usize = 2;

fn scalar() -> impl Strategy<Value = Gaussian> {
    (-5i64..=5, 1i64..=3, -2i64..=2, prop::bool::weighted(0.25))
        .prop_map(|(p, q, im, c)| gaussian(rational(p, q), rational(if c { im } else { 0 }, 1)))
}

fn index(max: u32) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0..=max, N).prop_map(MultiIndex::new)
}

fn delta_vec(max: u32) -> impl Strategy<Value = D> {
    prop::collection::vec((index(max), scalar()), 0..5).prop_map(|t| DeltaVector::from_terms(N, t))
}

fn poly(max: u32) -> impl Strategy<Value = Polynomial<Gaussian>> {
    prop::collection::vec((index(max), scalar()), 0..4).prop_map(|t| Polynomial::from_terms(N, t))
}

fn pullback() -> impl Strategy<Value = Option<RatMatrix>> {
    prop_oneof![
        5 => Just(None),
        1 => Just(Some(RatMatrix::neg_identity(N))),
        1 => Just(Some(RatMatrix::from_rows(vec![
            vec![rational(0, 1), rational(1, 1)],
            vec![rational(1, 1), rational(0, 1)],
        ]).unwrap())),
    ]
}

fn operator() -> impl Strategy<Value = Op> {
    prop::collection::vec((poly(2), index(2), pullback()), 1..3).prop_map(|ts| {
        ts.into_iter()
            .fold(Op::zero(N), |acc, (a, g, l)| acc.add(&Op::term(a, g, l)))
    })
}

fn clipped(v: &D, r: u32) -> D {
    DeltaVector::from_terms(
        N,
        v.terms()
            .filter(|(a, _)| a.order() <= r)
            .map(|(a, c)| (a.clone(), c.clone())),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn smap_and_tmap_are_inverse(v in delta_vec(3), f in poly(3)) {
        let r = 6;
        prop_assert_eq!(tmap(r, &smap(r, &v).unwrap()), v);
        prop_assert_eq!(smap(r, &tmap(r, &f)).unwrap(), f);
    }

    #[test]
    fn inner_product_through_pairing(v in delta_vec(3), w in delta_vec(3)) {
        let r = 6;
        let ip = inner(r, &v, &w).unwrap();
        prop_assert_eq!(ip.clone(), pair(&v.conj(), &smap(r, &w).unwrap()).unwrap());
        prop_assert_eq!(ip.conj(), inner(r, &w, &v).unwrap());
        let norm = inner(r, &v, &v).unwrap();
        let (re, im) = norm.parts();
        prop_assert!(im == rational(0, 1));
        prop_assert_eq!(re > rational(0, 1), !v.is_zero());
    }

    #[test]
    fn pairing_adjunction(q in operator(), a in index(3), b in index(3)) {
        let lhs = pair(&q.apply_delta(&DeltaVector::basis(a.clone())).unwrap(), &Polynomial::monomial(b.clone(), Gaussian::from_integer(1))).unwrap();
        let rhs = pair(&DeltaVector::basis(a), &q.transpose().apply_poly(&Polynomial::monomial(b, Gaussian::from_integer(1))).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn transpose_is_an_involution(q in operator()) {
        prop_assert_eq!(q.transpose().transpose(), q.clone());
        prop_assert_eq!(normal_form(&normal_form(&q)), normal_form(&q));
    }

    #[test]
    fn composition_acts_sequentially(p in operator(), q in operator(), v in delta_vec(2), f in poly(2)) {
        let pq = p.compose(&q);
        prop_assert_eq!(pq.apply_delta(&v).unwrap(), p.apply_delta(&q.apply_delta(&v).unwrap()).unwrap());
        prop_assert_eq!(pq.apply_poly(&f).unwrap(), p.apply_poly(&q.apply_poly(&f).unwrap()).unwrap());
    }

    #[test]
    fn degree_grows_by_at_most_the_essential_order(q in operator(), v in delta_vec(3)) {
        let eo = essential_order(&q, 3);
        let image = q.apply_delta(&v).unwrap();
        prop_assert!(deg_delta(&image).value <= deg_delta(&v).value.shift(eo.q as i64));
        prop_assert!(deg_delta(&image).value <= bound_operator(&deg_delta(&v), &q).value);
    }

    #[test]
    fn operator_bound_is_monotone(q in operator(), d1 in -4i64..4, d2 in -4i64..4) {
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        prop_assert!(bound_operator(&DegreeBound::finite(lo), &q).value <= bound_operator(&DegreeBound::finite(hi), &q).value);
    }

    #[test]
    fn adjoint_identity(q in operator(), v in delta_vec(4), w in delta_vec(2)) {
        let r = 2;
        let m = restrict(&q, r);
        let v = clipped(&v, m.r_codomain as u32);
        let w = clipped(&w, r as u32);
        let adj = adjoint_restriction(&q, r);
        prop_assert_eq!(inner(m.r_codomain, &v, &m.apply(&w).unwrap()).unwrap(), inner(r, &adj.apply(&v).unwrap(), &w).unwrap());
    }

    #[test]
    fn correction_is_a_projection(a in scalar(), w in delta_vec(2)) {
        let r = 2;
        let q = euler(N, a);
        let w = clipped(&w, r as u32);
        let rec = ExtensionRecord::new(N, r).with_residue(q.clone(), w).unwrap();
        let once = apply_counterterm(&rec, &onshell_correction(&rec, &q).unwrap()).unwrap();
        let twice = apply_counterterm(&once, &onshell_correction(&once, &q).unwrap()).unwrap();
        prop_assert_eq!(once.residue(&q), twice.residue(&q));
        let data = ProjectionData::of(&q, r);
        prop_assert_eq!(once.residue(&q).unwrap(), &data.corrected_residue(rec.residue(&q).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn massless_chi_is_linear(i in prop::collection::vec(0usize..3, 0..4), j in prop::collection::vec(0usize..3, 0..4), c in scalar()) {
        let s = Signature::default_for(3);
        let m2 = rational(0, 1);
        let cfg = ChiConfig::<Gaussian>::new(s.clone(), m2.clone());
        let a = ConstCoeffOperator::monomial(&i, &s, &m2).unwrap();
        let b = ConstCoeffOperator::monomial(&j, &s, &m2).unwrap().scale(&c);
        let sum = cfg.chi_projection(&a.add(&b), &Gaussian::from_integer(1)).unwrap().chi;
        let parts = cfg.chi_projection(&a, &Gaussian::from_integer(1)).unwrap().chi
            .add(&cfg.chi_projection(&b, &Gaussian::from_integer(1)).unwrap().chi);
        prop_assert_eq!(sum, parts);
    }
}

#[test]
fn enumerate_is_closed_downward() {
    for n in 1..=3 {
        for r in 0..=4 {
            let all = enumerate(n, r);
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
            assert_eq!(all, basis(n, r as i64));
            for a in &all {
                for i in 0..n {
                    if a.exponents()[i] > 0 {
                        let b = a.checked_sub(&MultiIndex::unit(n, i)).unwrap();
                        assert!(all.contains(&b));
                    }
                }
            }
        }
    }
}
