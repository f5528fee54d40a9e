use serde::{Serialize, Serializer};
use std::fmt;

use super::CoreError;

/// Largest dimension for which subsets are represented as bitmasks.
pub const MAX_MASK_DIM: usize = 24;

/// A subset of `{0, .., n-1}` stored as a bitmask. Displayed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u32,
    n: u8,
}

impl SubsetMask {
    pub fn new(n: usize, bits: u32) -> Result<Self, CoreError> {
        if n == 0 || n > MAX_MASK_DIM {
            return Err(CoreError::DimensionTooLarge { n, max: MAX_MASK_DIM });
        }
        if bits >> n != 0 {
            return Err(CoreError::MaskOutOfRange { n, bits });
        }
        Ok(SubsetMask { bits, n: n as u8 })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, 0).expect("dimension within mask range")
    }

    pub fn full(n: usize) -> Self {
        Self::new(n, Self::full_bits(n)).expect("dimension within mask range")
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        Self::from_indices(n, &[i]).expect("index in range")
    }

    pub fn from_indices(n: usize, idx: &[usize]) -> Result<Self, CoreError> {
        let mut bits = 0u32;
        for &i in idx {
            if i >= n {
                return Err(CoreError::IndexOutOfRange { index: i, n });
            }
            bits |= 1 << i;
        }
        Self::new(n, bits)
    }

    fn full_bits(n: usize) -> u32 {
        if n >= 32 {
            u32::MAX
        } else {
            (1u32 << n) - 1
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dim(self) -> usize {
        self.n as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.dim() && self.bits & (1 << i) != 0
    }

    pub fn count(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_full(self) -> bool {
        self.bits == Self::full_bits(self.dim())
    }

    pub fn is_proper_nonempty(self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    pub fn complement(self) -> Self {
        SubsetMask { bits: !self.bits & Self::full_bits(self.dim()), n: self.n }
    }

    pub fn union(self, other: Self) -> Self {
        SubsetMask { bits: self.bits | other.bits, n: self.n }
    }

    pub fn intersection(self, other: Self) -> Self {
        SubsetMask { bits: self.bits & other.bits, n: self.n }
    }

    pub fn minus(self, other: Self) -> Self {
        SubsetMask { bits: self.bits & !other.bits, n: self.n }
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn with(self, i: usize) -> Self {
        SubsetMask { bits: self.bits | (1 << i), n: self.n }
    }

    pub fn without(self, i: usize) -> Self {
        SubsetMask { bits: self.bits & !(1 << i), n: self.n }
    }

    /// Member indices in increasing order (0-based).
    pub fn indices(self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.contains(i)).collect()
    }

    /// Member indices in increasing order, 1-based, as used in reports.
    pub fn one_based(self) -> Vec<usize> {
        self.indices().into_iter().map(|i| i + 1).collect()
    }

    /// All nonempty proper subsets, by increasing size then increasing bits.
    pub fn proper_subsets_by_size(n: usize) -> Vec<SubsetMask> {
        let mut all: Vec<SubsetMask> = (1..Self::full_bits(n)).map(|b| SubsetMask { bits: b, n: n as u8 }).collect();
        all.sort_by_key(|m| (m.count(), m.bits));
        all
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}
