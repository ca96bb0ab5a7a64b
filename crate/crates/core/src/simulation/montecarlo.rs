use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::metrics::{apb, marginal_effect_ttest, marginal_effects, pooled_coverage, sdmae, T_CRITICAL};
use super::{generate_dataset, DgpConfig};
use crate::error::{Error, Result};
use crate::estimator::{estimate_model, ConvergenceStatus, EstimationResult, OptimizerConfig};
use crate::fuzzy::{interactions, mobius_to_capacity, shapley, MobiusVector};
use crate::utility::{Model, ParameterVector, SegmentKind};

/// One attribute change for the marginal-effect comparison.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginalEffectScenario {
    pub attribute: String,
    pub pct_change: f64,
}

/// How each replication is estimated and compared.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EstimationPlan {
    pub optimizer: OptimizerConfig,
    /// Start from the true parameters instead of the default start point.
    pub start_at_truth: bool,
    pub marginal_effects: Vec<MarginalEffectScenario>,
    /// Alternatives (0-based) whose attribute is changed; empty means the
    /// first alternative.
    pub changed_alternatives: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginalEffectTest {
    pub attribute: String,
    pub alternative: usize,
    pub true_mean: f64,
    pub true_sd: f64,
    pub est_mean: f64,
    pub est_sd: f64,
    pub t: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub estimate: EstimationResult,
    /// Loglik of the generated data at the true parameters.
    pub loglik_truth: f64,
    /// Shapley values then pairwise interactions, per capacity group.
    pub shapley_group: Vec<f64>,
    pub me_tests: Vec<MarginalEffectTest>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicationFailure {
    pub replication: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupMetrics {
    pub group: String,
    pub n_params: usize,
    pub sdmae: Option<f64>,
    pub apb: Option<f64>,
    /// Pooled over parameters with available standard errors.
    pub cp: Option<f64>,
    pub truth: Vec<f64>,
    pub mean_estimate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarloReport {
    pub replications: usize,
    pub n_failed: usize,
    pub failures: Vec<ReplicationFailure>,
    pub truth: ParameterVector,
    pub shapley_group_names: Vec<String>,
    pub groups: Vec<GroupMetrics>,
    /// Share of marginal-effect cells with `t < 1.96`.
    pub me_pass_proportion: Option<f64>,
    pub outcomes: Vec<ReplicationOutcome>,
}

impl MonteCarloReport {
    pub fn group(&self, name: &str) -> Option<&GroupMetrics> {
        self.groups.iter().find(|g| g.group == name)
    }

    /// Share of replications that hit the iteration cap or stalled.
    pub fn non_converged(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.estimate.status != ConvergenceStatus::Converged)
            .count()
    }
}

/// Shapley values then pairwise interaction indices of every capacity
/// group, with their labels.
pub fn shapley_group(model: &Model, theta: &[f64]) -> Result<(Vec<String>, Vec<f64>)> {
    let g = model.g();
    let mut names = Vec::new();
    let mut values = Vec::new();
    let groups = model.n_capacity_groups();
    for seg in model.packing().segments_of(|k| matches!(k, SegmentKind::Mobius { .. })) {
        let SegmentKind::Mobius { group } = seg.kind else { unreachable!() };
        let prefix = if groups > 1 { format!("[g{}]", group + 1) } else { String::new() };
        let mu = mobius_to_capacity(&MobiusVector::from_nonempty(g, &theta[seg.range()])?);
        for (i, s) in shapley(&mu).into_iter().enumerate() {
            names.push(format!("S{prefix}({})", i + 1));
            values.push(s);
        }
        for ((q, w), v) in interactions(&mu) {
            names.push(format!("I{prefix}({},{})", q + 1, w + 1));
            values.push(v);
        }
    }
    Ok((names, values))
}

fn changed_alternatives(plan: &EstimationPlan) -> Vec<usize> {
    if plan.changed_alternatives.is_empty() {
        vec![0]
    } else {
        plan.changed_alternatives.clone()
    }
}

/// Generates replication `replication`, estimates it and computes the
/// derived quantities.
pub fn run_replication(dgp: &DgpConfig, plan: &EstimationPlan, replication: usize) -> Result<ReplicationOutcome> {
    let (data, truth) = generate_dataset(dgp, replication)?;
    let model = dgp.model()?;
    let start = if plan.start_at_truth {
        truth.values.clone()
    } else {
        model.feasible_start(&data)?
    };
    let estimate = estimate_model(&model, &data, &start, &plan.optimizer)?;
    let lik = crate::estimator::Likelihood::new(&model, &data, &plan.optimizer.draws)?;
    let loglik_truth = lik.loglik(&truth.values)?;
    let (_, shapley_values) = shapley_group(&model, &estimate.theta)?;
    let changed = changed_alternatives(plan);
    let mut me_tests = Vec::new();
    for sc in &plan.marginal_effects {
        let t = marginal_effects(&model, &truth.values, &data, &sc.attribute, sc.pct_change, &changed, &plan.optimizer.draws)?;
        let e = marginal_effects(&model, &estimate.theta, &data, &sc.attribute, sc.pct_change, &changed, &plan.optimizer.draws)?;
        for alt in 0..data.n_alternatives {
            let (tm, ts, em, es) = (t.mean(alt), t.sd(alt), e.mean(alt), e.sd(alt));
            let tv = marginal_effect_ttest(tm, ts, em, es);
            me_tests.push(MarginalEffectTest {
                attribute: sc.attribute.clone(),
                alternative: alt,
                true_mean: tm,
                true_sd: ts,
                est_mean: em,
                est_sd: es,
                t: tv,
                pass: tv < T_CRITICAL,
            });
        }
    }
    Ok(ReplicationOutcome {
        replication,
        estimate,
        loglik_truth,
        shapley_group: shapley_values,
        me_tests,
    })
}

fn group_of(kind: &SegmentKind) -> &'static str {
    match kind {
        SegmentKind::Mobius { .. } => "ci",
        SegmentKind::Cutoff { .. } => "cutoff",
        SegmentKind::Beta => "beta",
        SegmentKind::Asc => "asc",
        SegmentKind::Error => "error",
        SegmentKind::LogScale => "scale",
    }
}

fn metrics_for(
    group: &str,
    truth: Vec<f64>,
    estimates: &[Vec<f64>],
    std_errors: Option<&[Vec<Option<f64>>]>,
) -> Result<GroupMetrics> {
    let n = truth.len();
    let mut mean_estimate = vec![0.0; n];
    for e in estimates {
        for (m, v) in mean_estimate.iter_mut().zip(e) {
            *m += v / estimates.len() as f64;
        }
    }
    let sd = match sdmae(&truth, estimates) {
        Ok(v) => Some(v),
        Err(Error::ZeroSpread) => None,
        Err(e) => return Err(e),
    };
    let cp = match std_errors {
        Some(se) => pooled_coverage(&truth, estimates, se)?,
        None => None,
    };
    Ok(GroupMetrics {
        group: group.to_string(),
        n_params: n,
        sdmae: if estimates.is_empty() { None } else { sd },
        apb: apb(&truth, estimates)?,
        cp,
        truth,
        mean_estimate: if estimates.is_empty() { Vec::new() } else { mean_estimate },
    })
}

/// Aggregates finished replications into per-group SDMAE, APB and CP.
pub fn aggregate(
    dgp: &DgpConfig,
    outcomes: Vec<ReplicationOutcome>,
    failures: Vec<ReplicationFailure>,
) -> Result<MonteCarloReport> {
    let model = dgp.model()?;
    let truth = dgp.true_parameters()?;
    let mut groups = Vec::new();
    let order = ["ci", "cutoff", "beta", "asc", "error", "scale"];
    for name in order {
        let idx: Vec<usize> = model
            .packing()
            .segments
            .iter()
            .filter(|s| group_of(&s.kind) == name)
            .flat_map(|s| s.range())
            .collect();
        if idx.is_empty() {
            continue;
        }
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let est: Vec<Vec<f64>> = outcomes.iter().map(|o| pick(&o.estimate.theta)).collect();
        let se: Vec<Vec<Option<f64>>> = outcomes
            .iter()
            .map(|o| idx.iter().map(|&i| o.estimate.std_errors[i]).collect())
            .collect();
        groups.push(metrics_for(name, pick(&truth.values), &est, Some(&se))?);
    }
    let (shapley_group_names, shapley_truth) = shapley_group(&model, &truth.values)?;
    if !shapley_truth.is_empty() {
        let est: Vec<Vec<f64>> = outcomes.iter().map(|o| o.shapley_group.clone()).collect();
        groups.push(metrics_for("shapley_interaction", shapley_truth, &est, None)?);
    }
    let cells: Vec<bool> = outcomes.iter().flat_map(|o| o.me_tests.iter().map(|t| t.pass)).collect();
    let me_pass_proportion =
        (!cells.is_empty()).then(|| cells.iter().filter(|&&p| p).count() as f64 / cells.len() as f64);
    Ok(MonteCarloReport {
        replications: outcomes.len() + failures.len(),
        n_failed: failures.len(),
        failures,
        truth,
        shapley_group_names,
        groups,
        me_pass_proportion,
        outcomes,
    })
}

/// Runs `dgp.replications` replications. Failed replications are recorded
/// with their error and excluded from the metrics. With the `parallel`
/// feature, replications run concurrently; results are identical either way.
pub fn run_monte_carlo(dgp: &DgpConfig, plan: &EstimationPlan) -> Result<MonteCarloReport> {
    dgp.validate()?;
    plan.optimizer.validate()?;
    let reps: Vec<usize> = (0..dgp.replications).collect();
    #[cfg(feature = "parallel")]
    let results: Vec<Result<ReplicationOutcome>> = {
        use rayon::prelude::*;
        reps.par_iter().map(|&r| run_replication(dgp, plan, r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<ReplicationOutcome>> = reps.iter().map(|&r| run_replication(dgp, plan, r)).collect();
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in reps.into_iter().zip(results) {
        match res {
            Ok(o) => outcomes.push(o),
            Err(e) => failures.push(ReplicationFailure {
                replication: r,
                message: e.to_string(),
            }),
        }
    }
    aggregate(dgp, outcomes, failures)
}
