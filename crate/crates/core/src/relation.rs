//! Binary relations over a finite base `0..n`, stored as bit matrices.
//!
//! Pairs iterate in lexicographic order, which is also the canonical order
//! used by the `.fos` writer.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("pair ({0}, {1}) out of range for base size {2}")]
    OutOfRange(usize, usize, usize),
    #[error("base size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("operation {0:?} needs a second operand")]
    MissingOperand(RaOp),
    #[error("operation {0:?} takes a single operand")]
    UnexpectedOperand(RaOp),
}

/// A set of ordered pairs over `0..size`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinRel {
    size: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BinRel {
    pub fn empty(size: usize) -> Self {
        let words_per_row = size.div_ceil(64).max(1);
        BinRel {
            size,
            words_per_row,
            bits: vec![0; words_per_row * size],
        }
    }

    pub fn full(size: usize) -> Self {
        let mut r = BinRel::empty(size);
        for a in 0..size {
            for b in 0..size {
                r.set(a, b);
            }
        }
        r
    }

    pub fn identity(size: usize) -> Self {
        let mut r = BinRel::empty(size);
        for a in 0..size {
            r.set(a, a);
        }
        r
    }

    pub fn from_pairs<I>(size: usize, pairs: I) -> Result<Self, RelationError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut r = BinRel::empty(size);
        for (a, b) in pairs {
            r.insert(a, b)?;
        }
        Ok(r)
    }

    /// Builds a relation from a predicate evaluated on every pair.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut r = BinRel::empty(size);
        for a in 0..size {
            for b in 0..size {
                if f(a, b) {
                    r.set(a, b);
                }
            }
        }
        r
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn slot(&self, a: usize, b: usize) -> (usize, u64) {
        (a * self.words_per_row + b / 64, 1u64 << (b % 64))
    }

    #[inline]
    fn set(&mut self, a: usize, b: usize) {
        let (w, m) = self.slot(a, b);
        self.bits[w] |= m;
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        if a >= self.size || b >= self.size {
            return false;
        }
        let (w, m) = self.slot(a, b);
        self.bits[w] & m != 0
    }

    pub fn insert(&mut self, a: usize, b: usize) -> Result<bool, RelationError> {
        if a >= self.size || b >= self.size {
            return Err(RelationError::OutOfRange(a, b, self.size));
        }
        let fresh = !self.contains(a, b);
        self.set(a, b);
        Ok(fresh)
    }

    pub fn remove(&mut self, a: usize, b: usize) -> bool {
        if !self.contains(a, b) {
            return false;
        }
        let (w, m) = self.slot(a, b);
        self.bits[w] &= !m;
        true
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.size;
        (0..n).flat_map(move |a| (0..n).filter(move |&b| self.contains(a, b)).map(move |b| (a, b)))
    }

    fn check_size(&self, other: &BinRel) -> Result<(), RelationError> {
        if self.size != other.size {
            Err(RelationError::SizeMismatch(self.size, other.size))
        } else {
            Ok(())
        }
    }

    fn zip_words(&self, other: &BinRel, f: impl Fn(u64, u64) -> u64) -> BinRel {
        BinRel {
            size: self.size,
            words_per_row: self.words_per_row,
            bits: self.bits.iter().zip(&other.bits).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    pub fn union(&self, other: &BinRel) -> Result<BinRel, RelationError> {
        self.check_size(other)?;
        Ok(self.zip_words(other, |x, y| x | y))
    }

    pub fn intersection(&self, other: &BinRel) -> Result<BinRel, RelationError> {
        self.check_size(other)?;
        Ok(self.zip_words(other, |x, y| x & y))
    }

    pub fn difference(&self, other: &BinRel) -> Result<BinRel, RelationError> {
        self.check_size(other)?;
        Ok(self.zip_words(other, |x, y| x & !y))
    }

    pub fn is_subset(&self, other: &BinRel) -> bool {
        self.size == other.size && self.bits.iter().zip(&other.bits).all(|(&x, &y)| x & !y == 0)
    }

    /// Complement relative to the full square.
    pub fn complement(&self) -> BinRel {
        let mut r = BinRel::full(self.size);
        for (w, &x) in r.bits.iter_mut().zip(&self.bits) {
            *w &= !x;
        }
        r
    }

    pub fn converse(&self) -> BinRel {
        let mut r = BinRel::empty(self.size);
        for (a, b) in self.pairs() {
            r.set(b, a);
        }
        r
    }

    /// Relational composition: `(a, c)` whenever `(a, b) ∈ self` and `(b, c) ∈ other`.
    pub fn compose(&self, other: &BinRel) -> Result<BinRel, RelationError> {
        self.check_size(other)?;
        let wpr = self.words_per_row;
        let mut r = BinRel::empty(self.size);
        for a in 0..self.size {
            for b in 0..self.size {
                if self.contains(a, b) {
                    for k in 0..wpr {
                        r.bits[a * wpr + k] |= other.bits[b * wpr + k];
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.converse()
    }

    /// Image of the relation under an element permutation.
    pub fn permute(&self, perm: &[usize]) -> BinRel {
        let mut r = BinRel::empty(self.size);
        for (a, b) in self.pairs() {
            r.set(perm[a], perm[b]);
        }
        r
    }
}

impl fmt::Debug for BinRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinRel[{}]", self.size)?;
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// The relation-algebra operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RaOp {
    Union,
    Complement,
    Converse,
    Compose,
    Identity,
}

/// Applies one relation-algebra operation. `Identity` uses `a` only for its base size.
pub fn ra_apply(op: RaOp, a: &BinRel, b: Option<&BinRel>) -> Result<BinRel, RelationError> {
    match (op, b) {
        (RaOp::Union, Some(b)) => a.union(b),
        (RaOp::Compose, Some(b)) => a.compose(b),
        (RaOp::Union | RaOp::Compose, None) => Err(RelationError::MissingOperand(op)),
        (RaOp::Complement, None) => Ok(a.complement()),
        (RaOp::Converse, None) => Ok(a.converse()),
        (RaOp::Identity, None) => Ok(BinRel::identity(a.size())),
        (_, Some(_)) => Err(RelationError::UnexpectedOperand(op)),
    }
}
