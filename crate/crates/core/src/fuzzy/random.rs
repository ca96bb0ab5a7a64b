use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::subset::SubsetId;
use super::{check_attribute_count, Capacity};
use crate::error::Result;

/// A random monotone capacity.
///
/// Visits the nonempty proper subsets in a random linear extension of the
/// inclusion order (each step picks uniformly among subsets whose covered
/// subsets are already placed), gives each a positive increment over its
/// predecessor and normalizes by the total.
pub fn random_capacity<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Result<Capacity> {
    check_attribute_count(g)?;
    let n = 1usize << g;
    let full = SubsetId::full(g);
    let mut placed = vec![false; n];
    placed[0] = true;
    let mut ready: Vec<SubsetId> = (0..g).map(SubsetId::singleton).filter(|&s| s != full).collect();
    let mut values = vec![0.0; n];
    let mut level = 0.0;
    while !ready.is_empty() {
        let s = ready.swap_remove(rng.random_range(0..ready.len()));
        placed[s.index()] = true;
        level += rng.random_range(f64::MIN_POSITIVE..1.0);
        values[s.index()] = level;
        for i in (0..g).filter(|&i| !s.contains(i)) {
            let up = s.insert(i);
            if up != full && !placed[up.index()] && up.members().all(|j| placed[up.remove(j).index()]) {
                ready.push(up);
            }
        }
    }
    if level > 0.0 {
        for v in values.iter_mut() {
            *v /= level;
        }
    }
    values[full.index()] = 1.0;
    Capacity::new(g, values)
}

/// A random additive capacity with weights drawn uniformly and normalized.
pub fn random_additive_capacity<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Result<Capacity> {
    check_attribute_count(g)?;
    let w: Vec<f64> = (0..g).map(|_| rng.random_range(f64::MIN_POSITIVE..1.0)).collect();
    let total: f64 = w.iter().sum();
    Capacity::additive(&w.iter().map(|x| x / total).collect::<Vec<_>>())
}
