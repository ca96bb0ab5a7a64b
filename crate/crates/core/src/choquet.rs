//! The discrete Choquet integral of normalized attribute values.

use crate::error::{Error, Result};
use crate::fuzzy::{Capacity, MobiusVector, SubsetId, MAX_ATTRIBUTES};

/// Choquet integral of `x` (entries in `[0, 1]`) with respect to `mu`.
///
/// Attributes are visited in descending order of value, ties broken by
/// ascending index, and each value is weighted by the capacity increment of
/// the growing coalition: `Σ x_(g) (μ(A_g) − μ(A_{g−1}))`.
pub fn choquet_integral(x: &[f64], mu: &Capacity) -> Result<f64> {
    if x.len() != mu.g() {
        return Err(Error::DimensionMismatch {
            what: "normalized attribute row",
            expected: mu.g(),
            found: x.len(),
        });
    }
    for &v in x {
        if !v.is_finite() {
            return Err(Error::NonFinite("normalized attribute row"));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfUnitInterval(v));
        }
    }
    Ok(choquet_unchecked(x, mu.values()))
}

/// Sorted-prefix evaluation without validation. `mu` is the dense lattice
/// vector of a (not necessarily normalized) set function over `x.len()`
/// attributes.
#[inline]
pub fn choquet_unchecked(x: &[f64], mu: &[f64]) -> f64 {
    let g = x.len();
    debug_assert!(g <= MAX_ATTRIBUTES && mu.len() == 1 << g);
    let mut order = [0usize; MAX_ATTRIBUTES];
    for (i, o) in order.iter_mut().enumerate().take(g) {
        *o = i;
    }
    let order = &mut order[..g];
    // insertion sort: stable, so ties keep ascending index
    for i in 1..g {
        let cur = order[i];
        let mut j = i;
        while j > 0 && x[order[j - 1]] < x[cur] {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = cur;
    }
    let mut mask = 0usize;
    let mut prev = 0.0;
    let mut total = 0.0;
    for &i in order.iter() {
        mask |= 1 << i;
        let m = mu[mask];
        total += x[i] * (m - prev);
        prev = m;
    }
    total
}

/// Möbius form `Σ_H m(H) · min_{i∈H} x_i`. Costs `2^G` per row; used as an
/// independent check on the sorted-prefix form.
pub fn choquet_integral_mobius(x: &[f64], m: &MobiusVector) -> Result<f64> {
    if x.len() != m.g() {
        return Err(Error::DimensionMismatch {
            what: "normalized attribute row",
            expected: m.g(),
            found: x.len(),
        });
    }
    let mut total = 0.0;
    for (k, &mk) in m.values().iter().enumerate().skip(1) {
        let h = SubsetId(k as u32);
        let lo = h.members().map(|i| x[i]).fold(f64::INFINITY, f64::min);
        total += mk * lo;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const X: [f64; 3] = [0.3, 0.1, 1.0];

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

    #[test]
    fn worked_examples() {
        // 0.1 + 0.3·0.262 + 0.1·0.638 = 0.2424, printed as 0.242
        let ci = choquet_integral(&X, &s1()).unwrap();
        assert!((ci - 0.2424).abs() < 1e-12);
        assert!((ci - 0.242).abs() < 1e-3);
        let add = Capacity::additive(&[0.4, 0.45, 0.15]).unwrap();
        assert!((choquet_integral(&X, &add).unwrap() - 0.315).abs() < 1e-12);
        let sym = Capacity::from_raw(3, vec![0.0, 0.333, 0.333, 0.666, 0.333, 0.666, 0.666, 0.999]).unwrap();
        assert!((choquet_integral(&X, &sym).unwrap() - 0.4662).abs() < 1e-12);
        let max = Capacity::new(3, vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let min = Capacity::new(3, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(choquet_integral(&X, &max).unwrap(), 1.0);
        assert!((choquet_integral(&X, &min).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mobius_form_agrees() {
        let mu = s1();
        let m = mu.to_mobius();
        let a = choquet_integral(&X, &mu).unwrap();
        let b = choquet_integral_mobius(&X, &m).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let mu = s1();
        assert!(matches!(choquet_integral(&[0.1, 0.2], &mu), Err(Error::DimensionMismatch { .. })));
        assert_eq!(choquet_integral(&[0.1, 0.2, 1.5], &mu), Err(Error::OutOfUnitInterval(1.5)));
        assert!(choquet_integral(&[0.1, f64::NAN, 0.5], &mu).is_err());
    }

    #[test]
    fn ties_use_ascending_index() {
        let mu = s1();
        let x = [0.5, 0.5, 0.2];
        // both orders telescope to the same value
        let expect = 0.5 * 0.687 + 0.2 * (1.0 - 0.687);
        assert!((choquet_integral(&x, &mu).unwrap() - expect).abs() < 1e-12);
    }
}
