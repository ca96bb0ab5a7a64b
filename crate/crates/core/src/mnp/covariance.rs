//! Identified parameterizations of the differenced error covariance.
//!
//! The base covariance `Θ̃` is the `(I−1) × (I−1)` covariance of utility
//! differences taken against the first alternative. The undifferenced
//! covariance is `Λ = blockdiag(0, Θ̃)`, and the covariance for any other
//! chosen alternative follows by differencing `Λ`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{exp, ln, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ErrorKind {
    /// Unit diagonal, 0.5 off-diagonal: independent equal-variance errors.
    Iid,
    /// Off-diagonals fixed at 0.5, diagonal free except the first.
    Diagonal,
    /// Every element free except the top-left scale normalization.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CovParameterization {
    /// Lower Cholesky factor with `L[0,0] = 1`, log diagonal, free
    /// off-diagonals.
    #[default]
    FreeCholeskyTopLeftFixed,
    /// Strict-lower Cholesky entries mapped to unit-norm rows, which forces a
    /// unit diagonal on `Θ̃`.
    PaperRowNormalized,
}

/// Error covariance specification for `n_alternatives` alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorStructure {
    pub kind: ErrorKind,
    pub parameterization: CovParameterization,
    pub n_alternatives: usize,
}

impl ErrorStructure {
    pub fn new(kind: ErrorKind, parameterization: CovParameterization, n_alternatives: usize) -> Result<Self> {
        if n_alternatives < 2 {
            return Err(Error::InvalidSpec(format!(
                "error structure needs at least two alternatives, got {n_alternatives}"
            )));
        }
        if kind == ErrorKind::Diagonal && parameterization == CovParameterization::PaperRowNormalized {
            return Err(Error::InvalidSpec(
                "row-normalized map forces a unit diagonal; it cannot parameterize a free diagonal".into(),
            ));
        }
        Ok(Self {
            kind,
            parameterization,
            n_alternatives,
        })
    }

    pub fn iid(n_alternatives: usize) -> Result<Self> {
        Self::new(ErrorKind::Iid, CovParameterization::default(), n_alternatives)
    }

    /// Dimension `I − 1` of the differenced covariance.
    pub fn dim(&self) -> usize {
        self.n_alternatives - 1
    }

    pub fn n_free(&self) -> usize {
        let d = self.dim();
        match (self.kind, self.parameterization) {
            (ErrorKind::Iid, _) => 0,
            (ErrorKind::Diagonal, _) => d - 1,
            (ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed) => d * (d + 1) / 2 - 1,
            (ErrorKind::Full, CovParameterization::PaperRowNormalized) => d * (d - 1) / 2,
        }
    }

    /// Parameter names in packing order.
    pub fn param_names(&self) -> Vec<String> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.n_free());
        match (self.kind, self.parameterization) {
            (ErrorKind::Iid, _) => {}
            (ErrorKind::Diagonal, _) => {
                for i in 1..d {
                    out.push(format!("ln_excess_var[{}]", i + 1));
                }
            }
            (ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed) => {
                for i in 1..d {
                    for r in 0..i {
                        out.push(format!("chol[{},{}]", i + 1, r + 1));
                    }
                    out.push(format!("ln_chol[{},{}]", i + 1, i + 1));
                }
            }
            (ErrorKind::Full, CovParameterization::PaperRowNormalized) => {
                for i in 1..d {
                    for r in 0..i {
                        out.push(format!("chol_raw[{},{}]", i + 1, r + 1));
                    }
                }
            }
        }
        out
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_free() {
            return Err(Error::DimensionMismatch {
                what: "error-structure parameters",
                expected: self.n_free(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("error-structure parameters"));
        }
        Ok(())
    }

    /// The differenced covariance `Θ̃` (against alternative 1).
    pub fn base_covariance(&self, params: &[f64]) -> Result<Matrix> {
        self.check_len(params)?;
        let d = self.dim();
        match (self.kind, self.parameterization) {
            (ErrorKind::Iid, _) => Ok(iid_matrix(d)),
            (ErrorKind::Diagonal, _) => {
                let mut m = iid_matrix(d);
                for i in 1..d {
                    m[(i, i)] = 0.5 + exp(params[i - 1]);
                }
                Ok(m)
            }
            (ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed) => {
                let mut l = Matrix::zeros(d, d);
                l[(0, 0)] = 1.0;
                let mut k = 0;
                for i in 1..d {
                    for r in 0..i {
                        l[(i, r)] = params[k];
                        k += 1;
                    }
                    l[(i, i)] = exp(params[k]);
                    k += 1;
                }
                l.matmul(&l.transpose())
            }
            (ErrorKind::Full, CovParameterization::PaperRowNormalized) => {
                let mut l = Matrix::identity(d);
                let mut k = 0;
                for i in 1..d {
                    for r in 0..i {
                        l[(i, r)] = params[k];
                        k += 1;
                    }
                }
                let lp = reparam_cholesky_rownorm(&l)?;
                lp.matmul(&lp.transpose())
            }
        }
    }

    /// Inverse of [`base_covariance`](Self::base_covariance): the free
    /// parameters reproducing `theta`, which must be representable.
    pub fn params_from_base(&self, theta: &Matrix) -> Result<Vec<f64>> {
        let d = self.dim();
        if theta.rows() != d || theta.cols() != d {
            return Err(Error::DimensionMismatch {
                what: "differenced covariance",
                expected: d,
                found: theta.rows(),
            });
        }
        const TOL: f64 = 1e-9;
        let unrepresentable = |why: &str| Err(Error::InvalidSpec(format!("covariance not representable: {why}")));
        match (self.kind, self.parameterization) {
            (ErrorKind::Iid, _) => {
                if theta.as_slice().iter().zip(iid_matrix(d).as_slice()).any(|(a, b)| (a - b).abs() > TOL) {
                    return unrepresentable("IID structure requires unit diagonal and 0.5 off-diagonal");
                }
                Ok(Vec::new())
            }
            (ErrorKind::Diagonal, _) => {
                let mut out = Vec::with_capacity(d - 1);
                for i in 0..d {
                    for j in 0..d {
                        if i != j && (theta[(i, j)] - 0.5).abs() > TOL {
                            return unrepresentable("off-diagonal elements must equal 0.5");
                        }
                    }
                }
                if (theta[(0, 0)] - 1.0).abs() > TOL {
                    return unrepresentable("top-left element must equal 1");
                }
                for i in 1..d {
                    let excess = theta[(i, i)] - 0.5;
                    if !(excess > 0.0) {
                        return unrepresentable("diagonal elements must exceed 0.5");
                    }
                    out.push(ln(excess));
                }
                Ok(out)
            }
            (ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed) => {
                if (theta[(0, 0)] - 1.0).abs() > TOL {
                    return unrepresentable("top-left element must equal 1");
                }
                let l = theta.cholesky()?;
                let mut out = Vec::with_capacity(self.n_free());
                for i in 1..d {
                    for r in 0..i {
                        out.push(l[(i, r)]);
                    }
                    out.push(ln(l[(i, i)]));
                }
                Ok(out)
            }
            (ErrorKind::Full, CovParameterization::PaperRowNormalized) => {
                if (0..d).any(|i| (theta[(i, i)] - 1.0).abs() > TOL) {
                    return unrepresentable("row-normalized map requires a unit diagonal");
                }
                let lp = theta.cholesky()?;
                let mut out = Vec::with_capacity(self.n_free());
                for i in 1..d {
                    for r in 0..i {
                        out.push(lp[(i, r)] / lp[(i, i)]);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Parameters reproducing the IID covariance; the default start point.
    pub fn initial_params(&self) -> Vec<f64> {
        // the IID matrix is representable under every structure
        self.params_from_base(&iid_matrix(self.dim()))
            .unwrap_or_else(|_| vec![0.0; self.n_free()])
    }

    /// `Λ = blockdiag(0, Θ̃)`, the `I × I` undifferenced covariance.
    pub fn undifferenced(&self, base: &Matrix) -> Matrix {
        let n = self.n_alternatives;
        let mut lambda = Matrix::zeros(n, n);
        for i in 1..n {
            for j in 1..n {
                lambda[(i, j)] = base[(i - 1, j - 1)];
            }
        }
        lambda
    }

    /// Differenced covariance for a 0-based chosen alternative.
    pub fn covariance_for_choice(&self, base: &Matrix, chosen: usize) -> Result<Matrix> {
        let n = self.n_alternatives;
        if chosen >= n {
            return Err(Error::IndexOutOfRange {
                what: "chosen alternative",
                index: chosen,
                len: n,
            });
        }
        let alts: Vec<usize> = (0..n).collect();
        Ok(super::differencing::difference_covariance(&self.undifferenced(base), &alts, chosen))
    }
}

/// Unit diagonal, 0.5 off-diagonal.
pub fn iid_matrix(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = if i == j { 1.0 } else { 0.5 };
        }
    }
    m
}

/// Row normalization of a lower-triangular factor with unit top-left
/// element: `Lp[i,r] = L[i,r] / a_i` for `r < i` and `Lp[i,i] = 1 / a_i`,
/// where `a_i = sqrt(1 + Σ_{r<i} L[i,r]²)`. The diagonal of `L` is not
/// used. Every row of the result has unit Euclidean norm.
pub fn reparam_cholesky_rownorm(l: &Matrix) -> Result<Matrix> {
    let d = l.rows();
    if l.cols() != d {
        return Err(Error::DimensionMismatch {
            what: "row normalization (square matrix)",
            expected: d,
            found: l.cols(),
        });
    }
    if l.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cholesky factor"));
    }
    let mut lp = Matrix::zeros(d, d);
    for i in 0..d {
        let ss: f64 = (0..i).map(|r| l[(i, r)] * l[(i, r)]).sum();
        let a = sqrt(1.0 + ss);
        for r in 0..i {
            lp[(i, r)] = l[(i, r)] / a;
        }
        lp[(i, i)] = 1.0 / a;
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_rownorm_example() {
        let lam = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.2]]).unwrap();
        let l = lam.cholesky().unwrap();
        assert!((l[(1, 0)] - 0.5).abs() < 1e-12);
        // printed as 0.98; the exact value is sqrt(0.95) = 0.9747
        assert!((l[(1, 1)] - 0.95f64.sqrt()).abs() < 1e-12);
        assert!((l[(1, 1)] - 0.98).abs() < 1e-2);
        let lp = reparam_cholesky_rownorm(&l).unwrap();
        assert!((lp[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((lp[(1, 0)] - 0.447).abs() < 1e-3);
        assert!((lp[(1, 1)] - 0.894).abs() < 1e-3);
        assert_eq!(reparam_cholesky_rownorm(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn parameter_counts() {
        let e = |k, p| ErrorStructure::new(k, p, 5).unwrap().n_free();
        use CovParameterization::*;
        assert_eq!(e(ErrorKind::Iid, FreeCholeskyTopLeftFixed), 0);
        assert_eq!(e(ErrorKind::Diagonal, FreeCholeskyTopLeftFixed), 3);
        assert_eq!(e(ErrorKind::Full, FreeCholeskyTopLeftFixed), 9);
        assert_eq!(e(ErrorKind::Full, PaperRowNormalized), 6);
        assert!(ErrorStructure::new(ErrorKind::Diagonal, PaperRowNormalized, 5).is_err());
    }

    #[test]
    fn round_trips() {
        let dgp = Matrix::from_rows(&[
            vec![1.0, 0.5, 0.5, 0.5],
            vec![0.5, 1.1, 0.5, 0.5],
            vec![0.5, 0.5, 1.2, 0.5],
            vec![0.5, 0.5, 0.5, 1.3],
        ])
        .unwrap();
        for kind in [ErrorKind::Diagonal, ErrorKind::Full] {
            let e = ErrorStructure::new(kind, CovParameterization::FreeCholeskyTopLeftFixed, 5).unwrap();
            let p = e.params_from_base(&dgp).unwrap();
            let back = e.base_covariance(&p).unwrap();
            for (a, b) in back.as_slice().iter().zip(dgp.as_slice()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let rn = ErrorStructure::new(ErrorKind::Full, CovParameterization::PaperRowNormalized, 5).unwrap();
        assert!(rn.params_from_base(&dgp).is_err());
        let iid = iid_matrix(4);
        let p = rn.params_from_base(&iid).unwrap();
        let back = rn.base_covariance(&p).unwrap();
        for (a, b) in back.as_slice().iter().zip(iid.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_params_are_iid() {
        for (kind, par) in [
            (ErrorKind::Iid, CovParameterization::FreeCholeskyTopLeftFixed),
            (ErrorKind::Diagonal, CovParameterization::FreeCholeskyTopLeftFixed),
            (ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed),
            (ErrorKind::Full, CovParameterization::PaperRowNormalized),
        ] {
            let e = ErrorStructure::new(kind, par, 4).unwrap();
            let theta = e.base_covariance(&e.initial_params()).unwrap();
            for (a, b) in theta.as_slice().iter().zip(iid_matrix(3).as_slice()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iid_differencing_is_exchangeable() {
        let e = ErrorStructure::iid(4).unwrap();
        let base = e.base_covariance(&[]).unwrap();
        for chosen in 0..4 {
            assert_eq!(e.covariance_for_choice(&base, chosen).unwrap(), iid_matrix(3));
        }
    }
}
