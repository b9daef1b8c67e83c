use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::deltaspace::{binomial, factorial};
use crate::error::{Error, Result};
use crate::opalg::Signature;
use crate::scalar::{Rational, Scalar};

use super::ConstCoeffOperator;

/// All `C(k, 2)` ways of removing a pair `(i, j)`, `i < j`, from the index
/// list, weighted by `g_{μᵢμⱼ}`.
pub fn lambda_contraction(indices: &[usize], sig: &Signature) -> Result<Vec<(i64, Vec<usize>)>> {
    for &mu in indices {
        sig.check_index(mu)?;
    }
    let mut out = Vec::new();
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            let w = if indices[i] == indices[j] {
                sig.g(indices[i])
            } else {
                0
            };
            let rest = indices
                .iter()
                .enumerate()
                .filter(|&(t, _)| t != i && t != j)
                .map(|(_, &mu)| mu)
                .collect();
            out.push((w, rest));
        }
    }
    Ok(out)
}

/// `α_j^k`, a polynomial in `□` and `m²`. `α_0^k` is the identity.
pub fn alpha_coefficient<S: Scalar>(
    j: u32,
    k: u32,
    sig: &Signature,
    m2: &Rational,
) -> Result<ConstCoeffOperator<S>> {
    if j == 0 {
        return Ok(ConstCoeffOperator::one(sig, m2));
    }
    if 2 * j > k {
        return Err(Error::Precondition(format!(
            "need 1 <= j <= k/2, got j = {j}, k = {k}"
        )));
    }
    let n = sig.dim() as i64;
    let wave = ConstCoeffOperator::<S>::wave(sig, m2);
    let mut sum = ConstCoeffOperator::zero(sig, m2);
    for p in 0..j {
        let mut denom = Rational::one();
        for q in 0..j {
            let d = n + 2 * k as i64 - 2 * p as i64 - 2 * q as i64 - 4;
            if d == 0 {
                return Err(Error::ZeroDenominator { p, q });
            }
            denom *= Rational::from_integer(d.into());
        }
        let coeff = Rational::from_integer(binomial(j - 1, p)) * pow(m2, p) / denom;
        sum = sum.add(&wave.pow(j - 1 - p).scale(&S::from_rational(coeff)));
    }
    let sign = if j.is_multiple_of(2) { 1 } else { -1 };
    Ok(ConstCoeffOperator::klein_gordon(sig, m2)
        .mul(&sum)
        .scale(&S::from_integer(sign)))
}

fn pow(x: &Rational, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, _| acc * x)
}

/// Closed form `χ(∂_{μ₁}⋯∂_{μ_k}) = Σ_j α_j^k Λ^j(∂_{μ₁}⋯∂_{μ_k}) / j!`.
pub fn chi_explicit<S: Scalar>(
    indices: &[usize],
    sig: &Signature,
    m2: &Rational,
) -> Result<ConstCoeffOperator<S>> {
    let k = indices.len() as u32;
    let mut layer: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    layer.insert(indices.to_vec(), Rational::one());
    let mut out = ConstCoeffOperator::zero(sig, m2);
    for j in 0..=k / 2 {
        if j > 0 {
            let mut next = BTreeMap::new();
            for (ix, w) in &layer {
                for (g, rest) in lambda_contraction(ix, sig)? {
                    if g != 0 {
                        let mut rest = rest;
                        rest.sort_unstable();
                        *next.entry(rest).or_insert_with(Rational::zero) +=
                            w * Rational::from_integer(g.into());
                    }
                }
            }
            next.retain(|_, w| !w.is_zero());
            layer = next;
        }
        if layer.is_empty() {
            break;
        }
        let alpha = alpha_coefficient::<S>(j, k, sig, m2)?;
        let jf = Rational::from_integer(factorial(j));
        let mut pj = ConstCoeffOperator::zero(sig, m2);
        for (ix, w) in &layer {
            let m = ConstCoeffOperator::monomial(ix, sig, m2)?;
            pj = pj.add(&m.scale(&S::from_rational(w / &jf)));
        }
        out = out.add(&alpha.mul(&pj));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    type Op = ConstCoeffOperator<Rational>;

    fn mink() -> Signature {
        Signature::default_for(4)
    }

    #[test]
    fn contractions() {
        let s = mink();
        assert_eq!(lambda_contraction(&[2, 2], &s).unwrap(), vec![(-1, vec![])]);
        assert_eq!(lambda_contraction(&[0, 1], &s).unwrap(), vec![(0, vec![])]);
        assert_eq!(
            lambda_contraction(&[1, 1, 2], &s).unwrap(),
            vec![(-1, vec![2]), (0, vec![1]), (0, vec![1])]
        );
        assert_eq!(lambda_contraction(&[0, 0, 0, 0], &s).unwrap().len(), 6);
        assert!(lambda_contraction(&[4], &s).is_err());
    }

    #[test]
    fn first_alpha() {
        let m2 = rational(3, 1);
        for (n, d) in [(4, 4), (2, 2)] {
            let s = Signature::default_for(n);
            let kg = Op::klein_gordon(&s, &m2);
            assert_eq!(
                alpha_coefficient::<Rational>(1, 2, &s, &m2).unwrap(),
                kg.scale(&rational(-1, d))
            );
        }
        let s = mink();
        assert_eq!(
            alpha_coefficient::<Rational>(0, 3, &s, &m2).unwrap(),
            Op::one(&s, &m2)
        );
        assert!(matches!(
            alpha_coefficient::<Rational>(1, 1, &s, &m2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn second_alpha_massless() {
        let s = mink();
        let m2 = rational(0, 1);
        let w = Op::wave(&s, &m2);
        assert_eq!(
            alpha_coefficient::<Rational>(2, 4, &s, &m2).unwrap(),
            w.pow(2).scale(&rational(1, 48))
        );
    }

    #[test]
    fn closed_form_examples() {
        let s = mink();
        let m2 = rational(1, 1);
        let mono = |ix: &[usize]| Op::monomial(ix, &s, &m2).unwrap();
        assert_eq!(chi_explicit::<Rational>(&[0], &s, &m2).unwrap(), mono(&[0]));
        assert_eq!(
            chi_explicit::<Rational>(&[0, 1], &s, &m2).unwrap(),
            mono(&[0, 1])
        );
        let kg = Op::klein_gordon(&s, &m2);
        assert_eq!(
            chi_explicit::<Rational>(&[0, 0], &s, &m2).unwrap(),
            mono(&[0, 0]).sub(&kg.scale(&rational(1, 4)))
        );
        assert_eq!(
            chi_explicit::<Rational>(&[], &s, &m2).unwrap(),
            Op::one(&s, &m2)
        );
    }
}
