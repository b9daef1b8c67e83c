//! Exact scalar fields.
//!
//! Everything in the engine is generic over [`Scalar`], an exact field with a
//! conjugation. Two instances are provided: [`Rational`] for real problems and
//! [`Gaussian`] (complex numbers with rational parts), which is needed as soon
//! as the imaginary unit shows up in a normalization constant.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

pub type Rational = BigRational;
pub type Gaussian = Complex<BigRational>;

/// An exact field with complex conjugation.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn conj(&self) -> Self;

    fn from_rational(q: Rational) -> Self;

    /// Real and imaginary parts.
    fn parts(&self) -> (Rational, Rational);

    /// Inverse of [`Scalar::parts`]; `None` if the field cannot hold the value.
    fn from_parts(re: Rational, im: Rational) -> Option<Self>;

    fn from_integer(k: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(k)))
    }

    fn from_bigint(k: BigInt) -> Self {
        Self::from_rational(Rational::from_integer(k))
    }

    fn is_real(&self) -> bool {
        self.parts().1.is_zero()
    }
}

impl Scalar for Rational {
    fn conj(&self) -> Self {
        self.clone()
    }

    fn from_rational(q: Rational) -> Self {
        q
    }

    fn parts(&self) -> (Rational, Rational) {
        (self.clone(), Rational::zero())
    }

    fn from_parts(re: Rational, im: Rational) -> Option<Self> {
        im.is_zero().then_some(re)
    }
}

impl Scalar for Gaussian {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_rational(q: Rational) -> Self {
        Complex::new(q, Rational::zero())
    }

    fn parts(&self) -> (Rational, Rational) {
        (self.re.clone(), self.im.clone())
    }

    fn from_parts(re: Rational, im: Rational) -> Option<Self> {
        Some(Complex::new(re, im))
    }
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn gaussian(re: Rational, im: Rational) -> Gaussian {
    Complex::new(re, im)
}

/// The imaginary unit.
pub fn imaginary_unit() -> Gaussian {
    Complex::new(Rational::zero(), Rational::one())
}

/// How a coefficient should be printed in front of a monomial.
///
/// `negative` is set when the value can be written as `-|c|` with a real
/// positive or purely imaginary positive magnitude; `body` is `None` when the
/// magnitude is exactly one.
pub(crate) struct CoeffText {
    pub negative: bool,
    pub body: Option<String>,
}

pub(crate) fn coeff_text<S: Scalar>(c: &S) -> CoeffText {
    let (re, im) = c.parts();
    if im.is_zero() {
        let negative = re.is_negative();
        let mag = re.abs();
        let body = (!mag.is_one()).then(|| mag.to_string());
        CoeffText { negative, body }
    } else if re.is_zero() {
        let negative = im.is_negative();
        let mag = im.abs();
        let body = if mag.is_one() {
            "i".to_string()
        } else {
            format!("{mag}*i")
        };
        CoeffText {
            negative,
            body: Some(body),
        }
    } else {
        let sign = if im.is_negative() { "-" } else { "+" };
        let mag = im.abs();
        let imag = if mag.is_one() {
            "i".to_string()
        } else {
            format!("{mag}*i")
        };
        CoeffText {
            negative: false,
            body: Some(format!("({re} {sign} {imag})")),
        }
    }
}

/// Compact text for a lone scalar, e.g. `-3/2`, `2*i`, `(1 - i)`.
pub fn scalar_text<S: Scalar>(c: &S) -> String {
    let t = coeff_text(c);
    let body = t.body.unwrap_or_else(|| "1".to_string());
    if t.negative {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_is_an_involution() {
        let z = gaussian(rational(3, 4), rational(-5, 7));
        assert_eq!(z.conj().conj(), z);
        assert_eq!(z.conj(), gaussian(rational(3, 4), rational(5, 7)));
    }

    #[test]
    fn exact_division() {
        let z = gaussian(rational(1, 1), rational(1, 1));
        let w = z.clone() / z.conj();
        assert_eq!(w, imaginary_unit());
    }

    #[test]
    fn text_forms() {
        assert_eq!(scalar_text(&rational(-3, 2)), "-3/2");
        assert_eq!(scalar_text(&Gaussian::from_integer(1)), "1");
        assert_eq!(scalar_text(&-imaginary_unit()), "-i");
        assert_eq!(
            scalar_text(&gaussian(rational(1, 2), rational(-1, 1))),
            "(1/2 - i)"
        );
    }
}
