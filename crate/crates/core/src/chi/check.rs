use std::fmt;
use std::thread;

use crate::error::Result;
use crate::opalg::{RatMatrix, Signature};
use crate::scalar::{rational, Rational, Scalar};

use super::{chi_explicit, ChiConfig, ConstCoeffOperator};

/// Non-decreasing index tuples of length `≤ k_max`, one per monomial.
pub fn monomials(n: usize, k_max: u32) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k_max {
        let mut next = Vec::new();
        for ix in &layer {
            let start = ix.last().copied().unwrap_or(0);
            for mu in start..n {
                let mut t = ix.clone();
                t.push(mu);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub signature: Signature,
    pub m2: Rational,
    pub indices: Vec<usize>,
    pub projection: String,
    pub explicit: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "metric {} m^2 = {} indices {:?}: projection {} vs explicit {}",
            self.signature, self.m2, self.indices, self.projection, self.explicit
        )
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CrosscheckReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the projection route with the closed form on every monomial of
/// order `≤ k_max`, under `diag(+,−,…)` and its negative.
pub fn chi_crosscheck<S: Scalar>(k_max: u32, n: usize, m2s: &[Rational]) -> CrosscheckReport {
    let sig = Signature::default_for(n);
    chi_crosscheck_with::<S, _>(k_max, &[sig.flipped(), sig][..], m2s, chi_explicit::<S>)
}

/// [`chi_crosscheck`] against an arbitrary closed form. Each `(metric, m²)`
/// pair runs on its own thread; results are merged in input order.
pub fn chi_crosscheck_with<S, F>(
    k_max: u32,
    sigs: &[Signature],
    m2s: &[Rational],
    explicit: F,
) -> CrosscheckReport
where
    S: Scalar,
    F: Fn(&[usize], &Signature, &Rational) -> Result<ConstCoeffOperator<S>> + Sync,
{
    let jobs: Vec<(Signature, Rational)> = sigs
        .iter()
        .flat_map(|s| m2s.iter().map(move |m| (s.clone(), m.clone())))
        .collect();
    let explicit = &explicit;
    let parts: Vec<CrosscheckReport> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(sig, m2)| scope.spawn(move || crosscheck_one(k_max, sig, m2, explicit)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("crosscheck worker panicked"))
            .collect()
    });
    parts
        .into_iter()
        .fold(CrosscheckReport::default(), |mut acc, p| {
            acc.checked += p.checked;
            acc.mismatches.extend(p.mismatches);
            acc
        })
}

fn crosscheck_one<S, F>(
    k_max: u32,
    sig: &Signature,
    m2: &Rational,
    explicit: &F,
) -> CrosscheckReport
where
    S: Scalar,
    F: Fn(&[usize], &Signature, &Rational) -> Result<ConstCoeffOperator<S>>,
{
    let cfg = ChiConfig::<S>::new(sig.clone(), m2.clone());
    let mut report = CrosscheckReport::default();
    for ix in monomials(sig.dim(), k_max) {
        report.checked += 1;
        let projected = ConstCoeffOperator::monomial(&ix, sig, m2)
            .and_then(|s| cfg.chi_projection(&s, &S::one()))
            .map(|r| r.chi);
        let closed = explicit(&ix, sig, m2);
        let agree = matches!((&projected, &closed), (Ok(a), Ok(b)) if a == b);
        if !agree {
            let text = |r: &Result<ConstCoeffOperator<S>>| match r {
                Ok(op) => op.to_string(),
                Err(e) => format!("error: {e}"),
            };
            report.mismatches.push(Mismatch {
                signature: sig.clone(),
                m2: m2.clone(),
                indices: ix,
                projection: text(&projected),
                explicit: text(&closed),
            });
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CovarianceReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CovarianceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `χ(S∘T) = χ(S)∘T` for the discrete isometries `T` of the metric:
/// single-axis reflections and swaps of axes with equal sign.
pub fn covariance_check<S: Scalar>(k_max: u32, sig: &Signature, m2: &Rational) -> CovarianceReport {
    let n = sig.dim();
    let cfg = ChiConfig::<S>::new(sig.clone(), m2.clone());
    let mut maps: Vec<(String, RatMatrix)> = Vec::new();
    for i in 0..n {
        let rows = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| match (r == c, r == i) {
                        (true, true) => rational(-1, 1),
                        (true, false) => rational(1, 1),
                        _ => rational(0, 1),
                    })
                    .collect()
            })
            .collect();
        maps.push((
            format!("flip {i}"),
            RatMatrix::from_rows(rows).expect("square"),
        ));
    }
    for i in 0..n {
        for j in i + 1..n {
            if sig.g(i) != sig.g(j) {
                continue;
            }
            let rows = (0..n)
                .map(|r| {
                    let src = if r == i {
                        j
                    } else if r == j {
                        i
                    } else {
                        r
                    };
                    (0..n).map(|c| rational((c == src) as i64, 1)).collect()
                })
                .collect();
            maps.push((
                format!("swap {i} {j}"),
                RatMatrix::from_rows(rows).expect("square"),
            ));
        }
    }
    let mut report = CovarianceReport::default();
    let one = S::one();
    for ix in monomials(n, k_max) {
        let s = match ConstCoeffOperator::<S>::monomial(&ix, sig, m2) {
            Ok(s) => s,
            Err(e) => {
                report.failures.push(format!("{ix:?}: {e}"));
                continue;
            }
        };
        let Ok(chi) = cfg.chi_projection(&s, &one) else {
            report.failures.push(format!("{ix:?}: projection failed"));
            continue;
        };
        for (name, t) in &maps {
            report.checked += 1;
            let moved = cfg.chi_projection(&s.substitute(t), &one).map(|r| r.chi);
            if moved.as_ref() != Ok(&chi.chi.substitute(t)) {
                report.failures.push(format!("{ix:?} under {name}"));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Gaussian;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(monomials(4, 4).len(), 70);
        assert_eq!(
            monomials(2, 2),
            vec![vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 1]]
        );
    }

    #[test]
    fn massless_routes_agree() {
        let rep = chi_crosscheck::<Gaussian>(3, 4, &[rational(0, 1)]);
        assert_eq!(rep.checked, 2 * 35);
        assert!(rep.passed(), "{:?}", rep.mismatches);
    }

    #[test]
    fn vacuous_crosscheck() {
        let rep = chi_crosscheck::<Gaussian>(0, 4, &[rational(0, 1), rational(1, 1)]);
        assert!(rep.passed());
        assert_eq!(rep.checked, 4);
    }

    #[test]
    fn mutated_closed_form_is_caught() {
        let sigs = [Signature::default_for(4)];
        let rep = chi_crosscheck_with::<Gaussian, _>(2, &sigs, &[rational(0, 1)], |ix, s, m| {
            let good = chi_explicit::<Gaussian>(ix, s, m)?;
            let src = ConstCoeffOperator::monomial(ix, s, m)?;
            Ok(src.sub(&good.sub(&src)))
        });
        assert!(!rep.passed());
        assert_eq!(rep.mismatches[0].indices, vec![0, 0]);
    }

    #[test]
    fn covariance_under_discrete_isometries() {
        for sig in [
            Signature::default_for(3),
            Signature::default_for(3).flipped(),
        ] {
            for m2 in [rational(0, 1), rational(2, 1)] {
                let rep = covariance_check::<Gaussian>(3, &sig, &m2);
                assert!(rep.passed(), "{sig} {m2}: {:?}", rep.failures);
                assert!(rep.checked > 0);
            }
        }
    }
}
