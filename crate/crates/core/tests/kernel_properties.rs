use choquet_probit_core::linalg::Matrix;
use choquet_probit_core::mnp::{
    choice_probabilities, mvncdf_ghk, reparam_cholesky_rownorm, CovParameterization, ErrorKind, ErrorStructure,
    HaltonPlan, ProbitKernel,
};
use proptest::prelude::*;
use std::f64::consts::PI;

/// A kernel with a random full covariance and utilities for `n` alternatives.
fn setup() -> impl Strategy<Value = (ProbitKernel, Vec<f64>)> {
    (3usize..=5).prop_flat_map(|n| {
        let err = ErrorStructure::new(ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed, n).unwrap();
        (
            prop::collection::vec(-0.6f64..0.6, err.n_free()),
            prop::collection::vec(-1.5f64..1.5, n),
        )
            .prop_map(move |(params, v)| (ProbitKernel::from_params(&err, &params).unwrap(), v))
    })
}

fn probs(kernel: &ProbitKernel, v: &[f64], draws: usize) -> Vec<f64> {
    let block = HaltonPlan::new(draws, 100).block(v.len() - 2, 0).unwrap();
    choice_probabilities(kernel, v, None, &block).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one((kernel, v) in setup()) {
        let s: f64 = probs(&kernel, &v, 500).iter().sum();
        prop_assert!((s - 1.0).abs() <= 0.01, "sum {s}");
    }

    #[test]
    fn translation_invariance((kernel, v) in setup(), c in -20.0f64..20.0) {
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let (a, b) = (probs(&kernel, &v, 200), probs(&kernel, &shifted, 200));
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn increasing_in_own_utility((kernel, v) in setup(), c in 0usize..5) {
        let c = c % v.len();
        let mut up = v.clone();
        up[c] += 0.05;
        let (a, b) = (probs(&kernel, &v, 200), probs(&kernel, &up, 200));
        prop_assert!(b[c] > a[c], "{} vs {}", b[c], a[c]);
    }

    #[test]
    fn rownorm_rows_are_unit(
        (d, raw) in (1usize..=5).prop_flat_map(|d| (Just(d), prop::collection::vec(-3.0f64..3.0, d * d))),
    ) {
        let mut l = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                l[(i, j)] = if i == j { raw[i * d + j].abs() + 0.1 } else { raw[i * d + j] };
            }
        }
        let r = reparam_cholesky_rownorm(&l).unwrap();
        for i in 0..d {
            let norm: f64 = r.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn ghk_error_shrinks_with_draws() {
    // trivariate equicorrelated orthant: 1/8 + 3 asin(ρ) / (4π)
    for rho in [-0.3, 0.2, 0.5, 0.8] {
        let mut cov = Matrix::identity(3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    cov[(i, j)] = rho;
                }
            }
        }
        let exact = 0.125 + 3.0 * f64::asin(rho) / (4.0 * PI);
        let err = |n: usize| (mvncdf_ghk(&[0.0; 3], &cov, &HaltonPlan::new(n, 100)).unwrap() - exact).abs();
        let (e500, e2000) = (err(500), err(2000));
        assert!(e2000 <= e500 + 1e-5, "rho {rho}: {e500} {e2000}");
        assert!(e2000 < 2e-3, "rho {rho}: {e2000}");
    }
}
