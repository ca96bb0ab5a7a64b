use alloc::vec;
use alloc::vec::Vec;

use super::SeStatus;
use crate::error::Result;
use crate::fuzzy::LinearRow;
use crate::linalg::{null_space_basis, Matrix};
use crate::math::sqrt;

/// Covariance of a constrained estimate on the subspace left free by the
/// equality rows and the active inequality rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCovariance {
    pub std_errors: Vec<Option<f64>>,
    pub status: SeStatus,
    /// `Z (Z'HZ)^{-1} Z'` in packed coordinates, when computed.
    pub covariance: Option<Matrix>,
}

/// Central second differences of `f` along the orthonormal null-space
/// directions `Z` of the binding constraints, inverted and mapped back:
/// `Cov = Z (Z'HZ)^{-1} Z'`. Parameters appearing in an active inequality
/// are flagged (`None`); a non-positive-definite reduced Hessian flags all.
pub fn reduced_covariance<F>(
    f: F,
    x: &[f64],
    eq: &[LinearRow],
    ineq: &[LinearRow],
    active: &[usize],
    h: f64,
) -> Result<ReducedCovariance>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let rows: Vec<Vec<f64>> = eq
        .iter()
        .chain(active.iter().map(|&i| &ineq[i]))
        .map(|r| r.coeffs.clone())
        .collect();
    let z = null_space_basis(&rows, n, 1e-10);
    let r = z.len();
    let mut flagged = vec![false; n];
    for &i in active {
        for k in ineq[i].support() {
            flagged[k] = true;
        }
    }
    let all_flagged = || ReducedCovariance {
        std_errors: vec![None; n],
        status: SeStatus::SingularHessian,
        covariance: None,
    };
    if r == 0 {
        return Ok(all_flagged());
    }
    let f0 = f(x)?;
    let at = |a: usize, sa: f64, b: Option<(usize, f64)>| -> Result<f64> {
        let mut p = x.to_vec();
        for (k, pk) in p.iter_mut().enumerate() {
            *pk += sa * h * z[a][k];
            if let Some((bi, sb)) = b {
                *pk += sb * h * z[bi][k];
            }
        }
        f(&p)
    };
    let mut hess = Matrix::zeros(r, r);
    for i in 0..r {
        let fp = at(i, 1.0, None)?;
        let fm = at(i, -1.0, None)?;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let fpp = at(i, 1.0, Some((j, 1.0)))?;
            let fpm = at(i, 1.0, Some((j, -1.0)))?;
            let fmp = at(i, -1.0, Some((j, 1.0)))?;
            let fmm = at(i, -1.0, Some((j, -1.0)))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let Ok(inv) = hess.inverse_spd() else {
        return Ok(all_flagged());
    };
    // Cov = Z inv Z'
    let mut cov = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..=a {
            let mut s = 0.0;
            for i in 0..r {
                let zi = z[i][a];
                if zi == 0.0 {
                    continue;
                }
                for j in 0..r {
                    s += zi * inv[(i, j)] * z[j][b];
                }
            }
            cov[(a, b)] = s;
            cov[(b, a)] = s;
        }
    }
    let std_errors = (0..n)
        .map(|k| {
            let v = cov[(k, k)];
            (!flagged[k] && v > 0.0).then(|| sqrt(v))
        })
        .collect();
    Ok(ReducedCovariance {
        std_errors,
        status: SeStatus::Computed,
        covariance: Some(cov),
    })
}
