//! Discrete fuzzy measures (capacities) over attribute subsets.
//!
//! Subsets of the `g` attributes are dense bitmasks ([`SubsetId`]); attribute
//! `i` (0-based) is bit `i`. Lattice-valued data are dense vectors of length
//! `2^g` indexed by the mask. Human-facing labels are 1-based, so `{x1, x3}`
//! is `"1,3"` and the empty set is `""`.

mod capacity;
mod constraints;
mod indices;
#[cfg(feature = "serde")]
mod labeled;
mod random;
mod subset;

pub use capacity::{capacity_to_mobius, mobius_to_capacity, Capacity, MobiusVector};
pub use constraints::{build_constraints, ConstraintSystem, LinearRow, MonotonicityPair};
pub use indices::{interaction_group, interaction_pair, interactions, shapley};
pub use random::{random_additive_capacity, random_capacity};
pub use subset::{labels_in_order, subsets_of, SubsetId, MAX_ATTRIBUTES};

use crate::error::{Error, Result};

pub(crate) fn check_attribute_count(g: usize) -> Result<()> {
    if (1..=MAX_ATTRIBUTES).contains(&g) {
        Ok(())
    } else {
        Err(Error::AttributeCount(g))
    }
}
