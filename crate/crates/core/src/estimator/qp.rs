//! Primal active-set solver for the SQP subproblem
//!
//! ```text
//! min  g·d + ½ d'Bd
//! s.t. E d = 0,  A d ≥ lower   (lower ≤ 0, so d = 0 is feasible)
//! ```
//!
//! Equality-constrained steps are solved in range-space form using the
//! Cholesky factor of `B`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, orthonormal_row_basis, Matrix};

pub(crate) struct QpProblem<'a> {
    pub b_factor: &'a Matrix,
    pub b: &'a Matrix,
    pub g: &'a [f64],
    pub eq: &'a [Vec<f64>],
    pub ineq: &'a [Vec<f64>],
    pub lower: &'a [f64],
}

#[derive(Debug, Clone)]
pub(crate) struct QpSolution {
    pub d: Vec<f64>,
    /// Inequality indices in the final working set.
    #[allow(dead_code)]
    pub working: Vec<usize>,
    /// Multipliers of the final working inequalities, same order.
    #[allow(dead_code)]
    pub multipliers: Vec<f64>,
    pub converged: bool,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves the equality-constrained step for working rows `rows`: returns
/// `(p, λ)` with `B p − Rᵀλ = −q` and `R p = 0`.
fn eqp(b_factor: &Matrix, q: &[f64], rows: &[&[f64]]) -> Result<(Vec<f64>, Vec<f64>)> {
    let binv_q = cholesky_solve(b_factor, q);
    if rows.is_empty() {
        return Ok((binv_q.iter().map(|x| -x).collect(), Vec::new()));
    }
    let w = rows.len();
    let y: Vec<Vec<f64>> = rows.iter().map(|r| cholesky_solve(b_factor, r)).collect();
    let mut m = Matrix::zeros(w, w);
    for i in 0..w {
        for j in 0..=i {
            let v = dot(rows[i], &y[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let rhs: Vec<f64> = rows.iter().map(|r| dot(r, &binv_q)).collect();
    let lm = m.cholesky().map_err(|_| Error::Infeasible("dependent working constraints".into()))?;
    let lambda = cholesky_solve(&lm, &rhs);
    let mut p: Vec<f64> = binv_q.iter().map(|x| -x).collect();
    for (yi, li) in y.iter().zip(&lambda) {
        for (pk, yk) in p.iter_mut().zip(yi) {
            *pk += li * yk;
        }
    }
    Ok((p, lambda))
}

pub(crate) fn solve_qp(prob: &QpProblem<'_>, initial: &[usize], tol: f64, max_iter: usize) -> Result<QpSolution> {
    let n = prob.g.len();
    let mut d = vec![0.0; n];
    // seed the working set with independent active rows
    let mut working: Vec<usize> = Vec::new();
    {
        let mut basis_rows: Vec<Vec<f64>> = prob.eq.to_vec();
        let mut rank = orthonormal_row_basis(&basis_rows, 1e-10).len();
        for &i in initial {
            basis_rows.push(prob.ineq[i].clone());
            let r = orthonormal_row_basis(&basis_rows, 1e-10).len();
            if r > rank && rank < n {
                rank = r;
                working.push(i);
            } else {
                basis_rows.pop();
            }
        }
    }
    let n_eq = prob.eq.len();
    let mut q = vec![0.0; n];
    for _ in 0..max_iter {
        let bd = prob.b.mul_vec(&d)?;
        for k in 0..n {
            q[k] = prob.g[k] + bd[k];
        }
        let rows: Vec<&[f64]> = prob
            .eq
            .iter()
            .map(|r| r.as_slice())
            .chain(working.iter().map(|&i| prob.ineq[i].as_slice()))
            .collect();
        let (p, lambda) = eqp(prob.b_factor, &q, &rows)?;
        if norm_inf(&p) <= tol * (1.0 + norm_inf(&d)) {
            let ineq_mult = &lambda[n_eq..];
            let worst = ineq_mult
                .iter()
                .enumerate()
                .filter(|(_, &l)| l < -tol)
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k);
            match worst {
                None => {
                    return Ok(QpSolution {
                        d,
                        multipliers: ineq_mult.to_vec(),
                        working,
                        converged: true,
                    })
                }
                Some(k) => {
                    working.remove(k);
                    continue;
                }
            }
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for (i, row) in prob.ineq.iter().enumerate() {
            if working.contains(&i) {
                continue;
            }
            let ap = dot(row, &p);
            if ap < -1e-14 {
                let room = (dot(row, &d) - prob.lower[i]).max(0.0);
                let a = room / -ap;
                if a < alpha {
                    alpha = a;
                    blocking = Some(i);
                }
            }
        }
        for (dk, pk) in d.iter_mut().zip(&p) {
            *dk += alpha * pk;
        }
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Ok(QpSolution {
        d,
        multipliers: vec![0.0; working.len()],
        working,
        converged: false,
    })
}
