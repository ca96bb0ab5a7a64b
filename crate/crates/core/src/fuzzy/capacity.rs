use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::subset::{all_subsets, SubsetId};
use super::{build_constraints, check_attribute_count};
use crate::error::{Error, Result};

/// Tolerance used by the capacity and Möbius invariant checks.
pub const INVARIANT_TOL: f64 = 1e-10;

/// A set function over the attribute lattice, `values[mask] = μ(mask)`.
///
/// [`Capacity::new`] enforces the fuzzy-measure axioms (μ(∅)=0, μ(X)=1,
/// monotone under inclusion). [`Capacity::from_raw`] skips the monotonicity
/// and boundary checks and is used for values produced by an optimizer or by
/// [`mobius_to_capacity`] on arbitrary input; call [`Capacity::validate`]
/// when the axioms matter.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    g: usize,
    values: Vec<f64>,
}

impl Capacity {
    pub fn new(g: usize, values: Vec<f64>) -> Result<Self> {
        let c = Self::from_raw(g, values)?;
        c.validate(INVARIANT_TOL)?;
        Ok(c)
    }

    /// Only checks the attribute count and the vector length.
    pub fn from_raw(g: usize, values: Vec<f64>) -> Result<Self> {
        check_attribute_count(g)?;
        if values.len() != 1 << g {
            return Err(Error::DimensionMismatch {
                what: "capacity values",
                expected: 1 << g,
                found: values.len(),
            });
        }
        Ok(Self { g, values })
    }

    /// Builds a capacity from `(label, value)` pairs; unlisted subsets other
    /// than ∅ are an error.
    pub fn from_labeled(g: usize, entries: &[(&str, f64)]) -> Result<Self> {
        check_attribute_count(g)?;
        let mut values = vec![f64::NAN; 1 << g];
        values[0] = 0.0;
        for &(label, v) in entries {
            values[SubsetId::parse_label(label, g)?.index()] = v;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidCapacity(format!(
                "no value for subset {{{}}}",
                SubsetId(missing as u32).label()
            )));
        }
        Self::new(g, values)
    }

    /// Additive capacity μ(A) = Σ_{i∈A} w_i; the weights must be
    /// nonnegative and sum to one.
    pub fn additive(weights: &[f64]) -> Result<Self> {
        let g = weights.len();
        check_attribute_count(g)?;
        let values = all_subsets(g)
            .map(|s| s.members().map(|i| weights[i]).sum())
            .collect();
        Self::new(g, values)
    }

    /// The uniform additive capacity (arithmetic mean aggregation).
    pub fn uniform(g: usize) -> Result<Self> {
        check_attribute_count(g)?;
        Self::additive(&vec![1.0 / g as f64; g])
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, s: SubsetId) -> f64 {
        self.values[s.index()]
    }

    /// Checks μ(∅)=0, μ(X)=1 and monotonicity, all within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("capacity values"));
        }
        if self.values[0].abs() > tol {
            return Err(Error::InvalidCapacity(format!(
                "μ(∅) = {} instead of 0",
                self.values[0]
            )));
        }
        let full = SubsetId::full(self.g);
        if (self.value(full) - 1.0).abs() > tol {
            return Err(Error::InvalidCapacity(format!(
                "μ(X) = {} instead of 1",
                self.value(full)
            )));
        }
        if let Some((a, b)) = self.first_monotonicity_violation(tol) {
            return Err(Error::InvalidCapacity(format!(
                "μ({{{}}}) = {} exceeds μ({{{}}}) = {}",
                a.label(),
                self.value(a),
                b.label(),
                self.value(b)
            )));
        }
        Ok(())
    }

    /// True when `A ⊆ B ⇒ μ(A) ≤ μ(B) + tol` for every pair.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.first_monotonicity_violation(tol).is_none()
    }

    // Checking every covering pair (A, A ∪ {i}) suffices by transitivity.
    fn first_monotonicity_violation(&self, tol: f64) -> Option<(SubsetId, SubsetId)> {
        for a in all_subsets(self.g) {
            for i in 0..self.g {
                if !a.contains(i) {
                    let b = a.insert(i);
                    if self.value(a) > self.value(b) + tol {
                        return Some((a, b));
                    }
                }
            }
        }
        None
    }

    /// μ(A ∪ B) = μ(A) + μ(B) for all disjoint A, B, within `tol`.
    pub fn is_additive(&self, tol: f64) -> bool {
        all_subsets(self.g).all(|s| {
            let sum: f64 = s.members().map(|i| self.value(SubsetId::singleton(i))).sum();
            (self.value(s) - sum).abs() <= tol
        })
    }

    pub fn to_mobius(&self) -> MobiusVector {
        capacity_to_mobius(self)
    }
}

/// Möbius representation `m` of a capacity; `values[∅] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusVector {
    g: usize,
    values: Vec<f64>,
}

impl MobiusVector {
    pub fn new(g: usize, values: Vec<f64>) -> Result<Self> {
        check_attribute_count(g)?;
        if values.len() != 1 << g {
            return Err(Error::DimensionMismatch {
                what: "Möbius values",
                expected: 1 << g,
                found: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidCapacity(format!(
                "Möbius value of ∅ is {} instead of 0",
                values[0]
            )));
        }
        Ok(Self { g, values })
    }

    /// From the `2^g - 1` nonempty-subset values, ordered by mask (`mask - 1`).
    pub fn from_nonempty(g: usize, nonempty: &[f64]) -> Result<Self> {
        check_attribute_count(g)?;
        if nonempty.len() != (1 << g) - 1 {
            return Err(Error::DimensionMismatch {
                what: "Möbius nonempty values",
                expected: (1 << g) - 1,
                found: nonempty.len(),
            });
        }
        let mut values = Vec::with_capacity(1 << g);
        values.push(0.0);
        values.extend_from_slice(nonempty);
        Ok(Self { g, values })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values of the nonempty subsets; variable `k` is subset mask `k + 1`.
    pub fn nonempty(&self) -> &[f64] {
        &self.values[1..]
    }

    #[inline]
    pub fn value(&self, s: SubsetId) -> f64 {
        self.values[s.index()]
    }

    /// Whether the vector satisfies the normalization equality and every
    /// monotonicity inequality, within `tol`.
    pub fn satisfies_constraints(&self, tol: f64) -> bool {
        let system = match build_constraints(self.g) {
            Ok(s) => s,
            Err(_) => return false,
        };
        system.max_violation(self.nonempty()) <= tol
    }

    pub fn to_capacity(&self) -> Capacity {
        mobius_to_capacity(self)
    }
}

/// μ(F) = Σ_{H⊆F} m(H), computed with the fast zeta transform.
pub fn mobius_to_capacity(m: &MobiusVector) -> Capacity {
    let mut values = m.values.clone();
    zeta_in_place(&mut values, m.g);
    Capacity { g: m.g, values }
}

/// m(H) = Σ_{F⊆H} (-1)^{|H\F|} μ(F), computed with the fast Möbius transform.
pub fn capacity_to_mobius(mu: &Capacity) -> MobiusVector {
    let mut values = mu.values.clone();
    for i in 0..mu.g {
        let bit = 1usize << i;
        for mask in 0..values.len() {
            if mask & bit != 0 {
                values[mask] -= values[mask ^ bit];
            }
        }
    }
    // μ(∅) may carry rounding noise; m(∅) = μ(∅) by definition.
    MobiusVector {
        g: mu.g,
        values,
    }
}

/// In-place subset-sum (zeta) transform over a `2^g` lattice vector.
pub(crate) fn zeta_in_place(values: &mut [f64], g: usize) {
    for i in 0..g {
        let bit = 1usize << i;
        for mask in 0..values.len() {
            if mask & bit != 0 {
                values[mask] += values[mask ^ bit];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::subsets_of;

    fn s1() -> Capacity {
        Capacity::from_labeled(
            3,
            &[
                ("1", 0.2),
                ("2", 0.3),
                ("3", 0.1),
                ("1,2", 0.687),
                ("1,3", 0.362),
                ("2,3", 0.493),
                ("1,2,3", 1.0),
            ],
        )
        .unwrap()
    }

    // Direct alternating-sum definition, independent of the fast transform.
    fn brute_mobius(mu: &Capacity) -> Vec<f64> {
        all_subsets(mu.g())
            .map(|h| {
                subsets_of(h)
                    .map(|f| {
                        let sign = if (h.len() - f.len()) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * mu.value(f)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn s1_mobius_matches_brute_force() {
        let mu = s1();
        let m = capacity_to_mobius(&mu);
        let brute = brute_mobius(&mu);
        for (a, b) in m.values().iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
        // frozen from the alternating-sum oracle
        let expect = [0.0, 0.2, 0.3, 0.187, 0.1, 0.062, 0.093, 0.058];
        for (a, b) in m.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn s1_round_trip() {
        let mu = s1();
        let back = mobius_to_capacity(&capacity_to_mobius(&mu));
        for (a, b) in back.values().iter().zip(mu.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mobius_to_capacity_on_s1_values() {
        let m = MobiusVector::from_nonempty(3, &[0.2, 0.3, 0.187, 0.1, 0.062, 0.093, 0.058]).unwrap();
        let mu = mobius_to_capacity(&m);
        let get = |l: &str| mu.value(SubsetId::parse_label(l, 3).unwrap());
        assert!((get("1,2") - 0.687).abs() < 1e-12);
        assert!((get("1,3") - 0.362).abs() < 1e-12);
        assert!((get("2,3") - 0.493).abs() < 1e-12);
        assert!((get("1,2,3") - 1.0).abs() < 1e-12);
        mu.validate(INVARIANT_TOL).unwrap();
    }

    #[test]
    fn additive_mobius_has_no_interactions() {
        let m = MobiusVector::from_nonempty(3, &[0.4, 0.45, 0.0, 0.15, 0.0, 0.0, 0.0]).unwrap();
        let mu = mobius_to_capacity(&m);
        let get = |l: &str| mu.value(SubsetId::parse_label(l, 3).unwrap());
        assert!((get("1,2") - 0.85).abs() < 1e-12);
        assert!((get("1,3") - 0.55).abs() < 1e-12);
        assert!((get("2,3") - 0.60).abs() < 1e-12);
        assert!(mu.is_additive(1e-12));

        let back = capacity_to_mobius(&Capacity::additive(&[0.4, 0.45, 0.15]).unwrap());
        for s in all_subsets(3).filter(|s| s.len() >= 2) {
            assert!(back.value(s).abs() < 1e-12);
        }
    }

    #[test]
    fn minimum_capacity_from_top_mobius() {
        let mut nonempty = vec![0.0; 7];
        nonempty[6] = 1.0;
        let mu = MobiusVector::from_nonempty(3, &nonempty).unwrap().to_capacity();
        for s in all_subsets(3) {
            let expect = if s == SubsetId::full(3) { 1.0 } else { 0.0 };
            assert_eq!(mu.value(s), expect);
        }
    }

    #[test]
    fn symmetric_capacity_mobius() {
        // μ(A) = 0.333·|A| on proper subsets, μ(X) = 1 as a capacity requires.
        let values: Vec<f64> = all_subsets(3)
            .map(|s| if s.len() == 3 { 1.0 } else { 0.333 * s.len() as f64 })
            .collect();
        let m = capacity_to_mobius(&Capacity::new(3, values).unwrap());
        for s in all_subsets(3) {
            let expect = match s.len() {
                0 | 2 => 0.0,
                1 => 0.333,
                _ => 0.001,
            };
            assert!((m.value(s) - expect).abs() < 1e-12, "{}", s.label());
        }
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            Capacity::from_raw(3, vec![0.0; 7]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            MobiusVector::new(2, vec![0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(MobiusVector::new(2, vec![0.1, 0.0, 0.0, 0.9]).is_err());
        assert_eq!(Capacity::from_raw(13, vec![]), Err(Error::AttributeCount(13)));
    }

    #[test]
    fn validate_flags_violations() {
        assert!(Capacity::new(2, vec![0.0, 0.6, 0.3, 0.5]).is_err());
        assert!(Capacity::new(2, vec![0.0, 0.6, 0.3, 0.9]).is_err());
        assert!(Capacity::new(2, vec![0.0, 0.6, 0.3, 1.0]).is_ok());
    }
}
