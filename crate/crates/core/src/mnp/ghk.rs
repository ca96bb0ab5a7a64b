use alloc::vec;
use alloc::vec::Vec;

use super::covariance::ErrorStructure;
use super::differencing::difference_covariance;
use super::halton::{DrawBlock, HaltonPlan};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{normal_cdf, normal_quantile_fast};

/// Probability floor applied before taking logs in the likelihood.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// GHK estimate of `P(Z ≤ upper)`, `Z ~ N(0, L L')`, given the lower
/// Cholesky factor. Uses the first `d − 1` coordinates of each draw; the last
/// dimension is integrated exactly. Variables are conditioned in natural
/// order.
pub fn ghk_with_factor(upper: &[f64], l: &Matrix, draws: &DrawBlock) -> f64 {
    let d = upper.len();
    debug_assert!(l.rows() == d && (d <= 1 || draws.dim() + 1 >= d));
    if d == 0 {
        return 1.0;
    }
    if d == 1 {
        return normal_cdf(upper[0] / l[(0, 0)]);
    }
    let first = normal_cdf(upper[0] / l[(0, 0)]);
    if first <= 0.0 {
        return 0.0;
    }
    let mut e = [0.0f64; super::halton::MAX_HALTON_DIM + 1];
    let mut total = 0.0;
    let n = draws.n_draws();
    for r in 0..n {
        let u = draws.point(r);
        let mut prob = first;
        e[0] = normal_quantile_fast(u[0] * first);
        for k in 1..d {
            let row = l.row(k);
            let mut s = upper[k];
            for j in 0..k {
                s -= row[j] * e[j];
            }
            let pk = normal_cdf(s / row[k]);
            prob *= pk;
            if prob <= 0.0 {
                break;
            }
            if k + 1 < d {
                e[k] = normal_quantile_fast(u[k] * pk);
            }
        }
        total += prob;
    }
    total / n as f64
}

/// GHK estimate of the multivariate normal rectangle probability
/// `P(Z ≤ upper)` with `Z ~ N(0, cov)`.
pub fn mvncdf_ghk(upper: &[f64], cov: &Matrix, plan: &HaltonPlan) -> Result<f64> {
    let d = upper.len();
    if cov.rows() != d || cov.cols() != d {
        return Err(Error::DimensionMismatch {
            what: "mvncdf covariance",
            expected: d,
            found: cov.rows(),
        });
    }
    if upper.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("mvncdf upper limits"));
    }
    let l = cov.cholesky()?;
    let draws = plan.block(d.saturating_sub(1), 0)?;
    Ok(ghk_with_factor(upper, &l, &draws))
}

/// Cholesky factors of the differenced covariance for every chosen
/// alternative, built once per covariance value and reused across
/// observations.
#[derive(Debug, Clone)]
pub struct ProbitKernel {
    lambda: Matrix,
    factors: Vec<Matrix>,
}

impl ProbitKernel {
    pub fn new(err: &ErrorStructure, base: &Matrix) -> Result<Self> {
        let lambda = err.undifferenced(base);
        let n = err.n_alternatives;
        let alts: Vec<usize> = (0..n).collect();
        let factors = (0..n)
            .map(|c| difference_covariance(&lambda, &alts, c).cholesky())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambda, factors })
    }

    pub fn from_params(err: &ErrorStructure, params: &[f64]) -> Result<Self> {
        Self::new(err, &err.base_covariance(params)?)
    }

    pub fn n_alternatives(&self) -> usize {
        self.factors.len()
    }

    /// Undifferenced covariance `Λ`.
    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    /// Probability that `chosen` has the highest utility among available
    /// alternatives. `available = None` means all are available.
    pub fn probability(
        &self,
        v: &[f64],
        chosen: usize,
        available: Option<&[bool]>,
        draws: &DrawBlock,
    ) -> Result<f64> {
        let n = self.factors.len();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what: "systematic utilities",
                expected: n,
                found: v.len(),
            });
        }
        if chosen >= n {
            return Err(Error::IndexOutOfRange {
                what: "chosen alternative",
                index: chosen,
                len: n,
            });
        }
        match available {
            Some(av) if av.iter().any(|a| !a) => {
                if !av[chosen] {
                    return Ok(0.0);
                }
                let alts: Vec<usize> = (0..n).filter(|&j| av[j]).collect();
                let upper: Vec<f64> = alts
                    .iter()
                    .filter(|&&j| j != chosen)
                    .map(|&j| v[chosen] - v[j])
                    .collect();
                if upper.is_empty() {
                    return Ok(1.0);
                }
                let l = difference_covariance(&self.lambda, &alts, chosen).cholesky()?;
                Ok(ghk_with_factor(&upper, &l, draws))
            }
            _ => {
                let mut upper = [0.0f64; super::halton::MAX_HALTON_DIM + 1];
                let mut k = 0;
                for j in (0..n).filter(|&j| j != chosen) {
                    upper[k] = v[chosen] - v[j];
                    k += 1;
                }
                Ok(ghk_with_factor(&upper[..k], &self.factors[chosen], draws))
            }
        }
    }
}

/// Choice probability `Φ_{I−1}(−M V; M Λ M')` for a 0-based chosen
/// alternative under the given error structure and parameters.
pub fn choice_probability(
    v: &[f64],
    chosen: usize,
    err: &ErrorStructure,
    err_params: &[f64],
    plan: &HaltonPlan,
) -> Result<f64> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("systematic utilities"));
    }
    let kernel = ProbitKernel::from_params(err, err_params)?;
    let draws = plan.block(err.n_alternatives.saturating_sub(2), 0)?;
    kernel.probability(v, chosen, None, &draws)
}

/// Probabilities of every alternative for one task.
pub fn choice_probabilities(
    kernel: &ProbitKernel,
    v: &[f64],
    available: Option<&[bool]>,
    draws: &DrawBlock,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    for (c, o) in out.iter_mut().enumerate() {
        *o = kernel.probability(v, c, available, draws)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::asin;
    use crate::mnp::covariance::ErrorKind;

    #[test]
    fn univariate_is_exact() {
        let p = mvncdf_ghk(&[0.0], &Matrix::identity(1), &HaltonPlan::default()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bivariate_orthants() {
        let plan = HaltonPlan::default();
        let p = mvncdf_ghk(&[0.0, 0.0], &Matrix::identity(2), &plan).unwrap();
        assert!((p - 0.25).abs() < 2e-3);
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let p = mvncdf_ghk(&[0.0, 0.0], &cov, &plan).unwrap();
        let exact = 0.25 + asin(0.5) / (2.0 * core::f64::consts::PI);
        assert!((p - exact).abs() < 5e-3);
    }

    #[test]
    fn rejects_indefinite() {
        let cov = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(mvncdf_ghk(&[0.0, 0.0], &cov, &HaltonPlan::default()), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn symmetric_cases() {
        let plan = HaltonPlan::default();
        let e2 = ErrorStructure::iid(2).unwrap();
        assert!((choice_probability(&[0.0, 0.0], 0, &e2, &[], &plan).unwrap() - 0.5).abs() < 1e-12);
        let e3 = ErrorStructure::iid(3).unwrap();
        for c in 0..3 {
            let p = choice_probability(&[0.0; 3], c, &e3, &[], &plan).unwrap();
            assert!((p - 1.0 / 3.0).abs() < 5e-3);
        }
    }

    #[test]
    fn unavailable_alternatives_drop_out() {
        let e = ErrorStructure::new(ErrorKind::Iid, Default::default(), 3).unwrap();
        let k = ProbitKernel::from_params(&e, &[]).unwrap();
        let draws = HaltonPlan::default().block(1, 0).unwrap();
        let av = [true, false, true];
        let p = choice_probabilities(&k, &[0.3, 5.0, 0.0], Some(&av), &draws).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p[0] + p[2] - 1.0).abs() < 1e-12);
        assert!((p[0] - normal_cdf(0.3)).abs() < 1e-12);
    }
}
