//! Feasible-iterate SQP for smooth objectives under linear constraints.
//!
//! Every iterate satisfies the constraints: the QP step keeps equality
//! residuals unchanged and stops at blocking inequalities, so any step
//! length in `(0, 1]` stays feasible. The Lagrangian Hessian is a damped
//! BFGS approximation and the line search is Armijo backtracking on the
//! objective itself.

use alloc::vec;
use alloc::vec::Vec;

use super::qp::{solve_qp, QpProblem};
use super::{ConvergenceStatus, GradientScheme, OptimizerConfig};
use crate::error::{Error, Result};
use crate::fuzzy::LinearRow;
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone)]
pub struct SqpOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub f_start: f64,
    pub iterations: usize,
    pub status: ConvergenceStatus,
    /// Inequality rows with slack below the active tolerance at `x`.
    pub active: Vec<usize>,
    pub kkt_residual: f64,
    pub trace: Vec<f64>,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Finite-difference gradient. Non-finite or failed evaluations propagate
/// as an error.
pub fn fd_gradient<F>(f: &F, x: &[f64], fx: f64, h: f64, scheme: GradientScheme) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for k in 0..x.len() {
        let orig = xp[k];
        match scheme {
            GradientScheme::Forward => {
                xp[k] = orig + h;
                g[k] = (f(&xp)? - fx) / h;
            }
            GradientScheme::Central => {
                xp[k] = orig + h;
                let fp = f(&xp)?;
                xp[k] = orig - h;
                let fm = f(&xp)?;
                g[k] = (fp - fm) / (2.0 * h);
            }
        }
        xp[k] = orig;
        if !g[k].is_finite() {
            return Err(Error::NonFinite("objective gradient"));
        }
    }
    Ok(g)
}

pub(crate) fn active_rows(ineq: &[LinearRow], x: &[f64], tol: f64) -> Vec<usize> {
    ineq.iter()
        .enumerate()
        .filter(|(_, r)| r.value(x) - r.rhs <= tol)
        .map(|(i, _)| i)
        .collect()
}

/// Minimizes `f` subject to `eq` rows (`a·x = rhs`) and `ineq` rows
/// (`a·x ≥ rhs`) from a feasible `x0`.
pub fn minimize<F>(f: F, x0: &[f64], eq: &[LinearRow], ineq: &[LinearRow], cfg: &OptimizerConfig) -> Result<SqpOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let n = x0.len();
    for r in eq.iter().chain(ineq) {
        if r.coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                what: "constraint row",
                expected: n,
                found: r.coeffs.len(),
            });
        }
    }
    let violation = eq
        .iter()
        .map(|r| (r.value(x0) - r.rhs).abs())
        .chain(ineq.iter().map(|r| (r.rhs - r.value(x0)).max(0.0)))
        .fold(0.0, f64::max);
    if violation > cfg.feasibility_tol {
        return Err(Error::Infeasible(alloc::format!(
            "start point violates constraints by {violation:e}"
        )));
    }
    let eq_rows: Vec<Vec<f64>> = eq.iter().map(|r| r.coeffs.clone()).collect();
    let ineq_rows: Vec<Vec<f64>> = ineq.iter().map(|r| r.coeffs.clone()).collect();

    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if !fx.is_finite() {
        return Err(Error::NonFinite("objective at start point"));
    }
    let f_start = fx;
    let mut g = fd_gradient(&f, &x, fx, cfg.gradient_step, cfg.gradient)?;
    let mut b = Matrix::identity(n);
    let mut b_is_identity = true;
    let mut first_update = true;
    let mut trace = vec![fx];
    let mut status = ConvergenceStatus::IterationLimit;
    let mut kkt = f64::INFINITY;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        let slack: Vec<f64> = ineq.iter().map(|r| r.value(&x) - r.rhs).collect();
        let lower: Vec<f64> = slack.iter().map(|s| (-s).min(0.0)).collect();
        let initial: Vec<usize> = (0..ineq.len()).filter(|&i| slack[i] <= cfg.active_tol).collect();
        let b_factor = match b.cholesky() {
            Ok(l) => l,
            Err(_) => {
                b = Matrix::identity(n);
                b_is_identity = true;
                b.cholesky()?
            }
        };
        let qp = solve_qp(
            &QpProblem {
                b_factor: &b_factor,
                b: &b,
                g: &g,
                eq: &eq_rows,
                ineq: &ineq_rows,
                lower: &lower,
            },
            &initial,
            1e-12,
            20 * (n + ineq.len()).max(10),
        )?;
        if !qp.converged && !b_is_identity {
            b = Matrix::identity(n);
            b_is_identity = true;
            first_update = true;
            continue;
        }
        let d = qp.d;
        kkt = norm_inf(&b.mul_vec(&d)?);
        if norm_inf(&d) <= cfg.xtol {
            status = ConvergenceStatus::Converged;
            break;
        }
        let slope = dot(&g, &d);
        if slope >= 0.0 {
            if b_is_identity {
                status = ConvergenceStatus::Converged;
                break;
            }
            b = Matrix::identity(n);
            b_is_identity = true;
            first_update = true;
            continue;
        }
        iterations += 1;
        let mut t = 1.0;
        let mut accepted = None;
        while t >= 1e-10 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            if let Ok(ft) = f(&xt) {
                if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                    accepted = Some((xt, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if b_is_identity {
                status = ConvergenceStatus::LineSearchFailed;
                break;
            }
            b = Matrix::identity(n);
            b_is_identity = true;
            first_update = true;
            continue;
        };
        let g_new = fd_gradient(&f, &x_new, f_new, cfg.gradient_step, cfg.gradient)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);

        if first_update {
            let sy = dot(&s, &y);
            let yy = dot(&y, &y);
            if sy > 0.0 && yy > 0.0 {
                b = Matrix::identity(n);
                let scale = yy / sy;
                for i in 0..n {
                    b[(i, i)] = scale;
                }
            }
            first_update = false;
        }
        damped_bfgs(&mut b, &s, &y);
        b_is_identity = false;

        if df.abs() <= cfg.ftol * (1.0 + fx.abs()) || norm_inf(&s) <= cfg.xtol {
            status = ConvergenceStatus::Converged;
            break;
        }
    }
    Ok(SqpOutcome {
        active: active_rows(ineq, &x, cfg.active_tol),
        x,
        f: fx,
        f_start,
        iterations,
        status,
        kkt_residual: kkt,
        trace,
    })
}

/// Powell-damped BFGS update keeping `B` positive definite.
fn damped_bfgs(b: &mut Matrix, s: &[f64], y: &[f64]) {
    let n = s.len();
    let bs = b.mul_vec(s).expect("square");
    let sbs = dot(s, &bs);
    if !(sbs > 0.0) {
        return;
    }
    let sy = dot(s, y);
    let theta = if sy >= 0.2 * sbs {
        1.0
    } else {
        0.8 * sbs / (sbs - sy)
    };
    let r: Vec<f64> = y.iter().zip(&bs).map(|(yi, bi)| theta * yi + (1.0 - theta) * bi).collect();
    let sr = dot(s, &r);
    if !(sr > 0.0) {
        return;
    }
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += r[i] * r[j] / sr - bs[i] * bs[j] / sbs;
        }
    }
}
