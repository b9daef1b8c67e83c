use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

/// Exponent vector `α ∈ ℕ₀ⁿ`.
///
/// Ordered graded-lexicographically: first by `|α|`, then with larger leading
/// exponents first, so that in two variables `(1,0)` precedes `(0,1)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `|α|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = Π αᵢ!`
    pub fn factorial(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &a| acc * factorial(a))
    }

    /// `(-1)^{|α|}` as a sign flag.
    pub fn is_odd(&self) -> bool {
        self.order() % 2 == 1
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α - β`, or `None` unless `β ≤ α` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `Π C(αᵢ, βᵢ)` for `β ≤ α`.
    pub fn binomial(&self, beta: &MultiIndex) -> BigInt {
        self.0
            .iter()
            .zip(&beta.0)
            .fold(BigInt::one(), |acc, (&a, &b)| acc * binomial(a, b))
    }

    /// All `β ≤ α`.
    pub fn divisors(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=a).map(move |b| {
                        let mut p = prefix.clone();
                        p.push(b);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// All multi-indices of dimension `n` with `|α| ≤ r`, in graded-lex order.
pub fn enumerate(n: usize, r: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=r {
        let mut buf = Vec::with_capacity(n);
        compositions(n, d, &mut buf, &mut out);
    }
    out
}

/// Like [`enumerate`] but empty for negative `r`.
pub fn basis(n: usize, r: i64) -> Vec<MultiIndex> {
    if r < 0 {
        Vec::new()
    } else {
        enumerate(n, r as u32)
    }
}

// Leading exponent descends, which is exactly the within-degree order of `Ord`.
fn compositions(slots: usize, total: u32, buf: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if slots == 0 {
        return;
    }
    if slots == 1 {
        buf.push(total);
        out.push(MultiIndex(buf.clone()));
        buf.pop();
        return;
    }
    for first in (0..=total).rev() {
        buf.push(first);
        compositions(slots - 1, total - first, buf, out);
        buf.pop();
    }
}
