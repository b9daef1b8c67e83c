//! Dense exact matrices and univariate polynomials over a [`Scalar`] field.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// `None` if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_columns(rows: usize, columns: &[Vec<S>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn conj(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::conj).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        (0..k).fold(Self::identity(self.rows), |acc, _| acc.mul(self))
    }

    /// Reduced row echelon form and pivot columns. Pivots are the first
    /// nonzero entry in row order, so results are deterministic.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = S::one() / m[(row, col)].clone();
            for j in col..m.cols {
                m[(row, j)] = m[(row, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != row && !m[(i, col)].is_zero() {
                    let f = m[(i, col)].clone();
                    for j in col..m.cols {
                        let sub = f.clone() * m[(row, j)].clone();
                        if !sub.is_zero() {
                            m[(i, j)] = m[(i, j)].clone() - sub;
                        }
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : Mv = 0}`, one vector per free column, with a 1 in that
    /// column.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// A particular solution of `Mx = b`, free variables set to zero.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn det(&self) -> S {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let mut det = S::one();
        for col in 0..m.cols {
            let Some(p) = (col..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                return S::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let piv = m[(col, col)].clone();
            det = det * piv.clone();
            for i in col + 1..m.rows {
                if !m[(i, col)].is_zero() {
                    let f = m[(i, col)].clone() / piv.clone();
                    for j in col..m.cols {
                        m[(i, j)] = m[(i, j)].clone() - f.clone() * m[(col, j)].clone();
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = S::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> fmt::Display for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(crate::scalar::scalar_text).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Univariate polynomial, constant term first, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> UniPoly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::new(vec![S::one()])
    }

    /// `z`
    pub fn z() -> Self {
        Self::new(vec![S::zero(), S::one()])
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        Self::new(self.coeffs.iter().map(|c| c.clone() / lc.clone()).collect())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        let Some(sd) = self.degree().filter(|&d| d >= dd) else {
            return (Self::zero(), self.clone());
        };
        let mut quot = vec![S::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = rem[k + dd].clone() / lc.clone();
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = rem[k + i].clone() - c.clone() * d.clone();
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Monic least common multiple.
    pub fn lcm(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g = self.gcd(other);
        self.mul(&other.divrem(&g).0).monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_integer(k as i64))
                .collect(),
        )
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    pub fn eval(&self, z: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// `p(M)` by Horner's rule.
    pub fn eval_matrix(&self, m: &Matrix<S>) -> Matrix<S> {
        let n = m.rows();
        self.coeffs
            .iter()
            .rev()
            .fold(Matrix::zeros(n, n), |acc, c| {
                acc.mul(m).add(&Matrix::identity(n).scale(c))
            })
    }

    /// `p(M)v` by Horner's rule, without forming matrix powers.
    pub fn eval_on_vector(&self, m: &Matrix<S>, v: &[S]) -> Vec<S> {
        let mut acc = vec![S::zero(); v.len()];
        for c in self.coeffs.iter().rev() {
            acc = m.mul_vec(&acc);
            for (a, x) in acc.iter_mut().zip(v) {
                *a = a.clone() + c.clone() * x.clone();
            }
        }
        acc
    }
}

impl<S: Scalar> fmt::Display for UniPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::deltaspace::{write_sum, MultiIndex};
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (MultiIndex::new(vec![k as u32]), c.clone()))
            .collect();
        let mut s = String::new();
        write_sum(&mut s, &terms, "z", 0)?;
        // single variable: drop the index the shared writer appends
        write!(f, "{}", s.replace("z0", "z"))
    }
}

/// Monic minimal polynomial of a square matrix.
///
/// For each basis vector not already annihilated, the Krylov sequence
/// `e, Me, M²e, …` is reduced incrementally until it becomes dependent; the
/// results are combined by least common multiple.
pub fn minimal_polynomial<S: Scalar>(m: &Matrix<S>) -> UniPoly<S> {
    assert!(m.is_square(), "minimal polynomial of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return UniPoly::one();
    }
    // A cyclic vector settles it in one Krylov pass: degree n is the maximum.
    let probe: Vec<S> = (0..n)
        .map(|j| S::from_integer(1 + (j % 3) as i64))
        .collect();
    let mut acc = vector_minimal_polynomial(m, &probe);
    if acc.degree() == Some(n) {
        return acc;
    }
    for j in 0..n {
        let mut e = vec![S::zero(); n];
        e[j] = S::one();
        if acc.eval_on_vector(m, &e).iter().all(|x| x.is_zero()) {
            continue;
        }
        acc = acc.lcm(&vector_minimal_polynomial(m, &e));
    }
    acc
}

fn vector_minimal_polynomial<S: Scalar>(m: &Matrix<S>, v: &[S]) -> UniPoly<S> {
    // Echelon rows with pivot positions and their expression in Krylov powers.
    let mut reduced: Vec<(usize, Vec<S>, Vec<S>)> = Vec::new();
    let mut current = v.to_vec();
    for k in 0..=v.len() {
        let mut w = current.clone();
        let mut expr = vec![S::zero(); k + 1];
        expr[k] = S::one();
        for (p, row, rexpr) in &reduced {
            if w[*p].is_zero() {
                continue;
            }
            let f = w[*p].clone();
            for (a, b) in w.iter_mut().zip(row) {
                *a = a.clone() - f.clone() * b.clone();
            }
            for (a, b) in expr.iter_mut().zip(rexpr) {
                *a = a.clone() - f.clone() * b.clone();
            }
        }
        match w.iter().position(|x| !x.is_zero()) {
            None => return UniPoly::new(expr).monic(),
            Some(p) => {
                let inv = S::one() / w[p].clone();
                let w: Vec<S> = w.into_iter().map(|x| x * inv.clone()).collect();
                let expr: Vec<S> = expr.into_iter().map(|x| x * inv.clone()).collect();
                reduced.push((p, w, expr));
            }
        }
        current = m.mul_vec(&current);
    }
    unreachable!("Krylov sequence longer than the dimension")
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;

    use super::*;
    use crate::scalar::{rational, Rational};

    fn q(a: i64) -> Rational {
        rational(a, 1)
    }

    fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn solve_and_nullspace() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(|x| x.is_zero()));
        let b = vec![q(6), q(12), q(2)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        assert!(m.solve(&[q(1), q(0), q(0)]).is_none());
    }

    #[test]
    fn det_and_inverse() {
        let m = mat(&[&[2, 1], &[7, 4]]);
        assert_eq!(m.det(), q(1));
        assert_eq!(m.mul(&m.inverse().unwrap()), Matrix::identity(2));
        assert!(mat(&[&[1, 2], &[2, 4]]).inverse().is_none());
        assert_eq!(mat(&[&[0, 1], &[1, 0]]).det(), q(-1));
    }

    #[test]
    fn polynomial_division() {
        let a = UniPoly::new(vec![q(-1), q(0), q(1)]);
        let b = UniPoly::new(vec![q(-1), q(1)]);
        let (quot, rem) = a.divrem(&b);
        assert_eq!(quot, UniPoly::new(vec![q(1), q(1)]));
        assert!(rem.is_zero());
        assert_eq!(a.gcd(&b), b);
        assert_eq!(a.lcm(&b), a);
        assert!(a.is_squarefree());
        assert!(!b.mul(&b).is_squarefree());
    }

    #[test]
    fn minimal_polynomials() {
        assert_eq!(
            minimal_polynomial(&Matrix::<Rational>::identity(3)),
            UniPoly::new(vec![q(-1), q(1)])
        );
        let d = Matrix::diagonal(&[q(1), q(0)]);
        let p = minimal_polynomial(&d);
        assert_eq!(p, UniPoly::new(vec![q(0), q(-1), q(1)]));
        assert!(p.eval_matrix(&d).is_zero());
        // z - 1 alone does not annihilate diag(1, 0)
        assert!(!UniPoly::new(vec![q(-1), q(1)]).eval_matrix(&d).is_zero());
        let jordan = mat(&[&[2, 1], &[0, 2]]);
        assert_eq!(
            minimal_polynomial(&jordan),
            UniPoly::new(vec![q(4), q(-4), q(1)])
        );
    }

    #[test]
    fn display() {
        let p = UniPoly::new(vec![q(1), q(0), rational(-1, 2)]);
        assert_eq!(p.to_string(), "-1/2*z^2 + 1");
    }
}
