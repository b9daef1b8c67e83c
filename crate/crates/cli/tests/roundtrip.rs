use proptest::prelude::*;

use onshell_cli::parse::parse_operator;
use onshell_core::deltaspace::{MultiIndex, Polynomial};
use onshell_core::opalg::{OperatorExpr, RatMatrix};
use onshell_core::scalar::{gaussian, rational, Gaussian};

const N: usize = 2;

fn scalar() -> impl Strategy<Value = Gaussian> {
    (-6i64..=6, 1i64..=4, -3i64..=3, prop::bool::weighted(0.3)).prop_map(|(p, q, im, complex)| {
        gaussian(rational(p, q), rational(if complex { im } else { 0 }, 1))
    })
}

fn index() -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0u32..=2, N).prop_map(MultiIndex::new)
}

fn pullback() -> impl Strategy<Value = Option<RatMatrix>> {
    prop_oneof![
        4 => Just(None),
        1 => Just(Some(RatMatrix::neg_identity(N))),
        1 => (1i64..=3, -2i64..=2).prop_map(|(a, b)| {
            Some(RatMatrix::from_rows(vec![
                vec![rational(a, 1), rational(b, 1)],
                vec![rational(0, 1), rational(1, 2)],
            ]).unwrap())
        }),
    ]
}

fn operator() -> impl Strategy<Value = OperatorExpr<Gaussian>> {
    prop::collection::vec((scalar(), index(), index(), pullback()), 1..4).prop_map(|terms| {
        terms
            .into_iter()
            .fold(OperatorExpr::zero(N), |acc, (c, m, g, l)| {
                acc.add(&OperatorExpr::term(Polynomial::monomial(m, c), g, l))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn printed_operators_parse_back(q in operator()) {
        let text = q.to_string();
        let back = parse_operator(&text, N).map_err(|e| TestCaseError::fail(e.render(&text)))?;
        prop_assert_eq!(back, q, "text {}", text);
    }
}
