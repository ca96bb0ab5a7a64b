//! Shapley values and interaction indices of a capacity.

use alloc::vec::Vec;

use super::capacity::Capacity;
use super::subset::{subsets_of, SubsetId, MAX_ATTRIBUTES};
use crate::error::{Error, Result};

const FACTORIALS: [u64; MAX_ATTRIBUTES + 2] = {
    let mut f = [1u64; MAX_ATTRIBUTES + 2];
    let mut i = 1;
    while i < f.len() {
        f[i] = f[i - 1] * i as u64;
        i += 1;
    }
    f
};

const fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact `(n - a - b)! a! / (n - b + 1)!`, reduced before the single
/// conversion to floating point.
fn coalition_weight(n: usize, a: usize, b: usize) -> f64 {
    let num = FACTORIALS[n - a - b] * FACTORIALS[a];
    let den = FACTORIALS[n - b + 1];
    let d = gcd(num, den);
    (num / d) as f64 / (den / d) as f64
}

/// Weight table indexed by coalition size `|A|` for groups of size `b`.
fn weights(n: usize, b: usize) -> Vec<f64> {
    (0..=(n - b)).map(|a| coalition_weight(n, a, b)).collect()
}

/// Shapley value of every attribute: the average marginal contribution
/// `μ(A ∪ {g}) − μ(A)` over all coalitions `A` not containing `g`.
pub fn shapley(mu: &Capacity) -> Vec<f64> {
    let n = mu.g();
    let w = weights(n, 1);
    let full = SubsetId::full(n);
    (0..n)
        .map(|g| {
            subsets_of(full.remove(g))
                .map(|a| w[a.len()] * (mu.value(a.insert(g)) - mu.value(a)))
                .sum()
        })
        .collect()
}

/// Pairwise interaction index I(q, w). Positive values indicate
/// complementarity, negative values redundancy.
pub fn interaction_pair(mu: &Capacity, q: usize, w: usize) -> Result<f64> {
    let n = mu.g();
    for i in [q, w] {
        if i >= n {
            return Err(Error::IndexOutOfRange {
                what: "attribute",
                index: i,
                len: n,
            });
        }
    }
    if q == w {
        return Err(Error::RepeatedAttribute(q));
    }
    // fixed evaluation order keeps I(q, w) and I(w, q) bitwise equal
    let (q, w) = (q.min(w), q.max(w));
    let wt = weights(n, 2);
    let rest = SubsetId::full(n).remove(q).remove(w);
    Ok(subsets_of(rest)
        .map(|a| {
            let d = mu.value(a.insert(q).insert(w)) - mu.value(a.insert(q)) - mu.value(a.insert(w))
                + mu.value(a);
            wt[a.len()] * d
        })
        .sum())
}

/// Interaction index of an arbitrary nonempty group `b`. Reduces to the
/// Shapley value for singletons and to [`interaction_pair`] for pairs.
pub fn interaction_group(mu: &Capacity, b: SubsetId) -> Result<f64> {
    let n = mu.g();
    if b.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !b.is_subset_of(SubsetId::full(n)) {
        return Err(Error::IndexOutOfRange {
            what: "subset",
            index: b.index(),
            len: 1 << n,
        });
    }
    let wt = weights(n, b.len());
    let rest = SubsetId(SubsetId::full(n).bits() & !b.bits());
    Ok(subsets_of(rest)
        .map(|a| {
            let diff: f64 = subsets_of(b)
                .map(|c| {
                    let sign = if (b.len() - c.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * mu.value(a.union(c))
                })
                .sum();
            wt[a.len()] * diff
        })
        .sum())
}

/// All pairwise indices in lexicographic pair order `(0,1), (0,2), …`.
pub fn interactions(mu: &Capacity) -> Vec<((usize, usize), f64)> {
    let n = mu.g();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for q in 0..n {
        for w in (q + 1)..n {
            // indices are in range and distinct by construction
            let v = interaction_pair(mu, q, w).unwrap_or(f64::NAN);
            out.push(((q, w), v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_over_coalitions() {
        // Σ_A w(|A|) over subsets of an (n-1)-set equals 1 for Shapley weights.
        for n in 1..=MAX_ATTRIBUTES {
            let w = weights(n, 1);
            let total: f64 = (0..n)
                .map(|a| w[a] * binomial(n - 1, a) as f64)
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    fn binomial(n: usize, k: usize) -> u64 {
        FACTORIALS[n] / (FACTORIALS[k] * FACTORIALS[n - k])
    }

    #[test]
    fn pair_errors() {
        let mu = Capacity::uniform(3).unwrap();
        assert_eq!(interaction_pair(&mu, 1, 1), Err(Error::RepeatedAttribute(1)));
        assert!(interaction_pair(&mu, 0, 3).is_err());
        assert_eq!(interaction_group(&mu, SubsetId::EMPTY), Err(Error::EmptySubset));
    }

    #[test]
    fn additive_has_zero_interactions() {
        let mu = Capacity::additive(&[0.4, 0.45, 0.15]).unwrap();
        let s = shapley(&mu);
        for (a, b) in s.iter().zip([0.4, 0.45, 0.15]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (_, v) in interactions(&mu) {
            assert!(v.abs() < 1e-15);
        }
        assert!(interaction_group(&mu, SubsetId::full(3)).unwrap().abs() < 1e-15);
    }
}
