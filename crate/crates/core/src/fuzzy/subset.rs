use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};

/// Largest supported attribute count (4096 lattice entries).
pub const MAX_ATTRIBUTES: usize = 12;

/// A subset of attributes encoded as a bitmask; attribute `i` is bit `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsetId(pub u32);

impl SubsetId {
    pub const EMPTY: SubsetId = SubsetId(0);

    #[inline]
    pub fn full(g: usize) -> Self {
        SubsetId((1u32 << g) - 1)
    }

    #[inline]
    pub fn singleton(i: usize) -> Self {
        SubsetId(1 << i)
    }

    pub fn from_attributes(attrs: &[usize]) -> Self {
        SubsetId(attrs.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    #[inline]
    pub fn insert(self, i: usize) -> Self {
        SubsetId(self.0 | (1 << i))
    }

    #[inline]
    pub fn remove(self, i: usize) -> Self {
        SubsetId(self.0 & !(1 << i))
    }

    #[inline]
    pub fn union(self, other: SubsetId) -> Self {
        SubsetId(self.0 | other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: SubsetId) -> bool {
        self.0 & !other.0 == 0
    }

    /// Attribute indices in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }

    /// 1-based, comma-separated, ascending: `{x1, x3}` is `"1,3"`.
    pub fn label(self) -> String {
        let mut s = String::new();
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", i + 1);
        }
        s
    }

    /// Parses a label produced by [`SubsetId::label`] for a `g`-attribute
    /// lattice. Whitespace around entries is ignored; duplicates are rejected.
    pub fn parse_label(label: &str, g: usize) -> Result<Self> {
        let label = label.trim();
        if label.is_empty() {
            return Ok(SubsetId::EMPTY);
        }
        let mut bits = 0u32;
        for part in label.split(',') {
            let k: usize = part.trim().parse().map_err(|_| {
                Error::InvalidCapacity(alloc::format!("bad subset label `{label}`"))
            })?;
            if k == 0 || k > g {
                return Err(Error::IndexOutOfRange {
                    what: "attribute label",
                    index: k,
                    len: g,
                });
            }
            if bits & (1 << (k - 1)) != 0 {
                return Err(Error::RepeatedAttribute(k));
            }
            bits |= 1 << (k - 1);
        }
        Ok(SubsetId(bits))
    }
}

/// All subsets of `mask` (including the empty set and `mask` itself) in
/// ascending bit order.
pub fn subsets_of(mask: SubsetId) -> impl Iterator<Item = SubsetId> {
    let m = mask.0;
    let mut next = Some(0u32);
    core::iter::from_fn(move || {
        let cur = next?;
        // next submask in ascending order: ((cur | !m) + 1) & m
        next = if cur == m {
            None
        } else {
            Some((cur | !m).wrapping_add(1) & m)
        };
        Some(SubsetId(cur))
    })
}

/// Every subset of a `g`-attribute lattice, ascending.
pub(crate) fn all_subsets(g: usize) -> impl Iterator<Item = SubsetId> {
    (0..(1u32 << g)).map(SubsetId)
}

/// Labels of every subset in mask order.
pub fn labels_in_order(g: usize) -> Vec<String> {
    all_subsets(g).map(SubsetId::label).collect()
}
