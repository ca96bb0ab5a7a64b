//! Constrained maximum simulated likelihood.
//!
//! The capacity constraints are linear in the Möbius parameters, so the
//! problem is a smooth objective over a polyhedron. [`sqp::minimize`] solves
//! it with feasible iterates; [`standard_errors`] inverts a numerical Hessian
//! on the subspace left free by the active constraints.

mod hessian;
mod likelihood;
mod qp;
pub mod sqp;

use alloc::string::String;
use alloc::vec::Vec;

pub use hessian::{reduced_covariance, ReducedCovariance};
pub use likelihood::Likelihood;
pub use sqp::{fd_gradient, minimize, SqpOutcome};

use crate::dataset::ChoiceDataset;
use crate::error::{Error, Result};
use crate::fuzzy::LinearRow;
use crate::mnp::{ErrorStructure, HaltonPlan};
use crate::utility::{Model, UtilitySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GradientScheme {
    Forward,
    #[default]
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConvergenceStatus {
    Converged,
    IterationLimit,
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SeStatus {
    Computed,
    NotRequested,
    /// The reduced Hessian was not positive definite; every entry is flagged.
    SingularHessian,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Relative change in the objective that stops the iteration.
    pub ftol: f64,
    /// Step length (max norm) that stops the iteration.
    pub xtol: f64,
    pub feasibility_tol: f64,
    /// Slack below which an inequality counts as active.
    pub active_tol: f64,
    pub gradient_step: f64,
    pub gradient: GradientScheme,
    /// Step for the second differences behind standard errors.
    pub hessian_step: f64,
    pub draws: HaltonPlan,
    pub compute_std_errors: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-10,
            xtol: 1e-7,
            feasibility_tol: 1e-8,
            active_tol: 1e-7,
            gradient_step: 1e-4,
            gradient: GradientScheme::Central,
            hessian_step: 1e-3,
            draws: HaltonPlan::default(),
            compute_std_errors: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ftol", self.ftol),
            ("xtol", self.xtol),
            ("feasibility_tol", self.feasibility_tol),
            ("active_tol", self.active_tol),
            ("gradient_step", self.gradient_step),
            ("hessian_step", self.hessian_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(alloc::format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSpec("max_iterations must be positive".into()));
        }
        if self.draws.n_draws == 0 {
            return Err(Error::InvalidSpec("n_draws must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimationResult {
    pub names: Vec<String>,
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub loglik_start: f64,
    pub n_obs: usize,
    /// Free parameters: packed length minus one equality per capacity group.
    pub k: usize,
    pub aic: f64,
    /// `None` where the parameter sits on an active constraint or the
    /// Hessian was singular.
    pub std_errors: Vec<Option<f64>>,
    pub se_status: SeStatus,
    pub iterations: usize,
    pub status: ConvergenceStatus,
    /// Indices of active monotonicity rows in the packed constraint list.
    pub active_constraints: Vec<usize>,
    pub kkt_residual: f64,
    pub max_violation: f64,
    pub loglik_trace: Vec<f64>,
}

impl EstimationResult {
    /// `estimate / std_error` where available.
    pub fn t_stats(&self) -> Vec<Option<f64>> {
        self.theta
            .iter()
            .zip(&self.std_errors)
            .map(|(t, s)| s.map(|s| t / s))
            .collect()
    }
}

/// `2k − 2·loglik`.
pub fn aic(loglik: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

/// Largest violation of the equality (absolute) and inequality (negative
/// part) rows at `x`.
pub fn max_violation(eq: &[LinearRow], ineq: &[LinearRow], x: &[f64]) -> f64 {
    eq.iter()
        .map(|r| (r.value(x) - r.rhs).abs())
        .chain(ineq.iter().map(|r| (r.rhs - r.value(x)).max(0.0)))
        .fold(0.0, f64::max)
}

/// Estimates `spec` with error structure `err` on `data`, from the
/// default feasible start.
pub fn estimate(
    data: &ChoiceDataset,
    spec: &UtilitySpec,
    err: ErrorStructure,
    config: &OptimizerConfig,
) -> Result<EstimationResult> {
    let model = Model::compile(spec, err, &data.column_names)?;
    let start = model.feasible_start(data)?;
    estimate_model(&model, data, &start, config)
}

/// Estimates a compiled model from a given feasible start.
pub fn estimate_model(
    model: &Model,
    data: &ChoiceDataset,
    start: &[f64],
    config: &OptimizerConfig,
) -> Result<EstimationResult> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidData("dataset has no choice tasks".into()));
    }
    let lik = Likelihood::new(model, data, &config.draws)?;
    let (eq, ineq) = model.constraints()?;
    let n_obs = data.len() as f64;
    let objective = |theta: &[f64]| lik.loglik(theta).map(|ll| -ll / n_obs);
    let out = minimize(objective, start, &eq, &ineq, config)?;
    let loglik = -out.f * n_obs;
    let k = model.n_free_params();
    let (std_errors, se_status) = if config.compute_std_errors {
        let neg_ll = |theta: &[f64]| lik.loglik(theta).map(|ll| -ll);
        let cov = reduced_covariance(neg_ll, &out.x, &eq, &ineq, &out.active, config.hessian_step)?;
        (cov.std_errors, cov.status)
    } else {
        (alloc::vec![None; out.x.len()], SeStatus::NotRequested)
    };
    Ok(EstimationResult {
        names: model.names().to_vec(),
        max_violation: max_violation(&eq, &ineq, &out.x),
        theta: out.x,
        loglik,
        loglik_start: -out.f_start * n_obs,
        n_obs: data.len(),
        k,
        aic: aic(loglik, k),
        std_errors,
        se_status,
        iterations: out.iterations,
        status: out.status,
        active_constraints: out.active,
        kkt_residual: out.kkt_residual,
        loglik_trace: out.trace.iter().map(|f| -f * n_obs).collect(),
    })
}

/// Recomputes standard errors for a finished estimate.
pub fn standard_errors(
    result: &EstimationResult,
    data: &ChoiceDataset,
    spec: &UtilitySpec,
    err: ErrorStructure,
    config: &OptimizerConfig,
) -> Result<ReducedCovariance> {
    let model = Model::compile(spec, err, &data.column_names)?;
    let lik = Likelihood::new(&model, data, &config.draws)?;
    let (eq, ineq) = model.constraints()?;
    let neg_ll = |theta: &[f64]| lik.loglik(theta).map(|ll| -ll);
    reduced_covariance(neg_ll, &result.theta, &eq, &ineq, &result.active_constraints, config.hessian_step)
}
