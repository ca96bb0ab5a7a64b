use alloc::vec;
use alloc::vec::Vec;

use super::check_attribute_count;
use super::subset::{subsets_of, SubsetId};
use crate::error::Result;

/// `coeffs · x` compared with `rhs`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl LinearRow {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Variable indices with a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, _)| k)
    }
}

/// The (attribute, subset) pair an inequality row encodes:
/// μ(H ∪ {attribute}) − μ(H) ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotonicityPair {
    pub attribute: usize,
    pub base: SubsetId,
}

/// Linear constraints on a Möbius vector.
///
/// Variable `k` is the Möbius value of subset mask `k + 1` (the empty set is
/// not a variable). The single equality row has `rhs = 1`; every inequality
/// row reads `coeffs · m ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSystem {
    pub g: usize,
    pub n_vars: usize,
    pub equality: LinearRow,
    pub inequalities: Vec<LinearRow>,
    pub pairs: Vec<MonotonicityPair>,
}

/// Normalization and monotonicity constraints for a `g`-attribute capacity in
/// Möbius space.
///
/// For every attribute `k` and every `H ⊆ X \ {k}` the row
/// `Σ_{K⊆H} m(K ∪ {k}) ≥ 0` is emitted, in order of `k` and then of `H`'s
/// mask. That is `g · 2^(g-1)` inequalities.
pub fn build_constraints(g: usize) -> Result<ConstraintSystem> {
    check_attribute_count(g)?;
    let n_vars = (1usize << g) - 1;
    let full = SubsetId::full(g);
    let equality = LinearRow {
        coeffs: vec![1.0; n_vars],
        rhs: 1.0,
    };
    let mut inequalities = Vec::with_capacity(g << (g - 1));
    let mut pairs = Vec::with_capacity(g << (g - 1));
    for k in 0..g {
        let rest = full.remove(k);
        for h in subsets_of(rest) {
            let mut coeffs = vec![0.0; n_vars];
            for sub in subsets_of(h) {
                coeffs[sub.insert(k).index() - 1] = 1.0;
            }
            inequalities.push(LinearRow { coeffs, rhs: 0.0 });
            pairs.push(MonotonicityPair {
                attribute: k,
                base: h,
            });
        }
    }
    Ok(ConstraintSystem {
        g,
        n_vars,
        equality,
        inequalities,
        pairs,
    })
}

impl ConstraintSystem {
    /// Largest violation over the equality (absolute residual) and the
    /// inequalities (negative part).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = (self.equality.value(x) - self.equality.rhs).abs();
        self.inequalities
            .iter()
            .map(|r| (r.rhs - r.value(x)).max(0.0))
            .fold(eq, f64::max)
    }

    /// Smallest inequality slack `coeffs · x − rhs`.
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.inequalities
            .iter()
            .map(|r| r.value(x) - r.rhs)
            .fold(f64::INFINITY, f64::min)
    }
}
