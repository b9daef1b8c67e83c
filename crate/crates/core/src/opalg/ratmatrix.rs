use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Rational;

/// Square rational matrix `L`, used for pullbacks `u ↦ u∘L`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatMatrix(Matrix<Rational>);

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::PullbackShape { n });
        }
        Ok(RatMatrix(
            Matrix::from_rows(rows).expect("rows checked square"),
        ))
    }

    pub fn identity(n: usize) -> Self {
        RatMatrix(Matrix::identity(n))
    }

    /// `-I`, the parity map.
    pub fn neg_identity(n: usize) -> Self {
        RatMatrix(Matrix::identity(n).scale(&-Rational::one()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.0[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.0.to_rows()
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Matrix::identity(self.dim())
    }

    pub fn det(&self) -> Rational {
        self.0.det()
    }

    pub fn abs_det(&self) -> Rational {
        self.det().abs()
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .inverse()
            .map(RatMatrix)
            .ok_or(Error::SingularPullback)
    }

    pub fn transpose(&self) -> Self {
        RatMatrix(self.0.transpose())
    }

    /// `self · other`
    pub fn mul(&self, other: &Self) -> Self {
        RatMatrix(self.0.mul(&other.0))
    }
}

impl fmt::Display for RatMatrix {
    /// `[a,b;c,d]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, ";")?;
            }
            for j in 0..self.dim() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn shape_and_inverse() {
        assert!(matches!(
            RatMatrix::from_rows(vec![vec![rational(1, 1), rational(0, 1)]]),
            Err(Error::PullbackShape { .. })
        ));
        let l = RatMatrix::from_rows(vec![
            vec![rational(2, 1), rational(1, 1)],
            vec![rational(0, 1), rational(1, 2)],
        ])
        .unwrap();
        assert_eq!(l.det(), rational(1, 1));
        assert!(l.mul(&l.inverse().unwrap()).is_identity());
        assert_eq!(l.to_string(), "[2,1;0,1/2]");
        let singular = RatMatrix::from_rows(vec![vec![rational(0, 1)]]).unwrap();
        assert_eq!(singular.inverse(), Err(Error::SingularPullback));
        assert_eq!(RatMatrix::neg_identity(3).abs_det(), rational(1, 1));
    }
}
