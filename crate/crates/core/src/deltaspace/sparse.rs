use std::collections::btree_map::{self, Entry};
use std::collections::BTreeMap;

use crate::degree::Degree;
use crate::scalar::Scalar;

use super::MultiIndex;

/// Canonical sparse map `MultiIndex → S` with no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Terms<S> {
    pub n: usize,
    pub map: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> Terms<S> {
    pub fn new(n: usize) -> Self {
        Terms {
            n,
            map: BTreeMap::new(),
        }
    }

    pub fn from_iter<I: IntoIterator<Item = (MultiIndex, S)>>(n: usize, iter: I) -> Self {
        let mut t = Terms::new(n);
        for (k, c) in iter {
            t.add_term(k, c);
        }
        t
    }

    pub fn add_term(&mut self, key: MultiIndex, c: S) {
        assert_eq!(key.dim(), self.n, "multi-index dimension mismatch");
        if c.is_zero() {
            return;
        }
        match self.map.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn coeff(&self, key: &MultiIndex) -> S {
        self.map.get(key).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, MultiIndex, S> {
        self.map.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.map.is_empty()
    }

    pub fn degree(&self) -> Degree {
        self.map
            .keys()
            .map(|k| k.order())
            .max()
            .map_or(Degree::NegInfinity, |d| Degree::Finite(d as i64))
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.map.keys().map(|k| k.order()).min()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Terms::new(self.n);
        }
        Terms {
            n: self.n,
            map: self
                .map
                .iter()
                .map(|(k, v)| (k.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Terms {
            n: self.n,
            map: self
                .map
                .iter()
                .map(|(k, v)| (k.clone(), -v.clone()))
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Terms {
            n: self.n,
            map: self
                .map
                .iter()
                .map(|(k, v)| (k.clone(), v.conj()))
                .collect(),
        }
    }
}
