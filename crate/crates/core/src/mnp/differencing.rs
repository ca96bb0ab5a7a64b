use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// The `(I−1) × I` matrix taking utilities to differences against the
/// chosen alternative: row `r` is `U_j − U_chosen` for the `r`-th
/// non-chosen `j` in index order. `chosen` is 0-based.
pub fn differencing_matrix(n_alternatives: usize, chosen: usize) -> Result<Matrix> {
    if n_alternatives < 2 {
        return Err(Error::DimensionMismatch {
            what: "alternatives (at least two)",
            expected: 2,
            found: n_alternatives,
        });
    }
    if chosen >= n_alternatives {
        return Err(Error::IndexOutOfRange {
            what: "chosen alternative",
            index: chosen,
            len: n_alternatives,
        });
    }
    let mut m = Matrix::zeros(n_alternatives - 1, n_alternatives);
    for (r, j) in (0..n_alternatives).filter(|&j| j != chosen).enumerate() {
        m[(r, j)] = 1.0;
        m[(r, chosen)] = -1.0;
    }
    Ok(m)
}

/// `M Λ M'` for the differencing matrix of `chosen`, computed directly from
/// index arithmetic.
pub(crate) fn difference_covariance(lambda: &Matrix, alts: &[usize], chosen: usize) -> Matrix {
    let others: alloc::vec::Vec<usize> = alts.iter().copied().filter(|&j| j != chosen).collect();
    let d = others.len();
    let c = chosen;
    let mut out = Matrix::zeros(d, d);
    for (r, &i) in others.iter().enumerate() {
        for (s, &j) in others.iter().enumerate() {
            out[(r, s)] = lambda[(i, j)] - lambda[(i, c)] - lambda[(c, j)] + lambda[(c, c)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pseudo_code_branches() {
        let m = differencing_matrix(3, 0).unwrap();
        assert_eq!(m.to_rows(), vec![vec![-1.0, 1.0, 0.0], vec![-1.0, 0.0, 1.0]]);
        let m = differencing_matrix(3, 1).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, -1.0, 0.0], vec![0.0, -1.0, 1.0]]);
        let m = differencing_matrix(2, 1).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, -1.0]]);
        assert!(differencing_matrix(3, 3).is_err());
        assert!(differencing_matrix(1, 0).is_err());
    }

    #[test]
    fn direct_product_matches_matmul() {
        let lambda = Matrix::from_rows(&[
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.5, 0.5],
            vec![0.0, 0.5, 1.1, 0.5],
            vec![0.0, 0.5, 0.5, 1.2],
        ])
        .unwrap();
        for chosen in 0..4 {
            let m = differencing_matrix(4, chosen).unwrap();
            let full = m.matmul(&lambda).unwrap().matmul(&m.transpose()).unwrap();
            let direct = difference_covariance(&lambda, &[0, 1, 2, 3], chosen);
            for (a, b) in full.as_slice().iter().zip(direct.as_slice()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
