//! JSON documents and plain-text reports written by the commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use choquet_probit_core::dataset::ChoiceDataset;
use choquet_probit_core::estimator::{ConvergenceStatus, EstimationResult, OptimizerConfig, SeStatus};
use choquet_probit_core::fuzzy::{interactions, mobius_to_capacity, shapley, Capacity, MobiusVector, SubsetId};
use choquet_probit_core::mnp::ErrorStructure;
use choquet_probit_core::simulation::{MarginalEffects, MonteCarloReport, ME_QUANTILES};
use choquet_probit_core::utility::{Model, UtilitySpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub t_stat: Option<f64>,
}

/// One capacity group in readable form. Subset keys are 1-based attribute
/// positions, e.g. `"1,3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySummary {
    pub group: usize,
    pub attributes: Vec<String>,
    pub capacity: Capacity,
    pub mobius: MobiusVector,
    pub shapley: Vec<f64>,
    pub interactions: BTreeMap<String, f64>,
}

pub fn capacity_summaries(model: &Model, theta: &[f64]) -> CliResult<Vec<CapacitySummary>> {
    let params = model.unpack(theta)?;
    let attributes: Vec<String> = model.spec().ci_attributes.iter().map(|a| a.name.clone()).collect();
    let mut out = Vec::new();
    for (group, m) in params.mobius.iter().enumerate() {
        let mu = mobius_to_capacity(m);
        out.push(CapacitySummary {
            group,
            attributes: attributes.clone(),
            shapley: shapley(&mu),
            interactions: interactions(&mu)
                .into_iter()
                .map(|((q, w), v)| (format!("{},{}", q + 1, w + 1), v))
                .collect(),
            capacity: mu,
            mobius: m.clone(),
        });
    }
    Ok(out)
}

/// Everything needed to reload and analyze an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub spec: UtilitySpec,
    pub error: ErrorStructure,
    pub column_names: Vec<String>,
    pub optimizer: OptimizerConfig,
    pub estimate: EstimationResult,
    pub parameters: Vec<ParameterRow>,
    pub capacities: Vec<CapacitySummary>,
}

impl ResultDocument {
    pub fn new(model: &Model, data: &ChoiceDataset, optimizer: &OptimizerConfig, estimate: EstimationResult) -> CliResult<Self> {
        let parameters = estimate
            .names
            .iter()
            .zip(&estimate.theta)
            .zip(estimate.std_errors.iter().zip(estimate.t_stats()))
            .map(|((name, &v), (&se, t))| ParameterRow {
                name: name.clone(),
                estimate: v,
                std_error: se,
                t_stat: t,
            })
            .collect();
        Ok(Self {
            spec: model.spec().clone(),
            error: *model.error_structure(),
            column_names: data.column_names.clone(),
            optimizer: optimizer.clone(),
            capacities: capacity_summaries(model, &estimate.theta)?,
            parameters,
            estimate,
        })
    }

    pub fn model(&self) -> CliResult<Model> {
        Ok(Model::compile(&self.spec, self.error, &self.column_names)?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn opt(v: Option<f64>, width: usize, prec: usize) -> String {
    match v {
        Some(x) => format!("{x:>width$.prec$}"),
        None => format!("{:>width$}", "-"),
    }
}

fn status_text(s: ConvergenceStatus) -> &'static str {
    match s {
        ConvergenceStatus::Converged => "converged",
        ConvergenceStatus::IterationLimit => "iteration limit reached",
        ConvergenceStatus::LineSearchFailed => "line search failed",
    }
}

fn capacity_text(out: &mut String, caps: &[CapacitySummary]) {
    for c in caps {
        let _ = writeln!(out, "\nCapacity group {}", c.group + 1);
        for (i, a) in c.attributes.iter().enumerate() {
            let _ = writeln!(out, "  x{} = {a}", i + 1);
        }
        // by cardinality, then lexicographic on members
        let mut subsets: Vec<SubsetId> = (1..c.capacity.values().len() as u32).map(SubsetId).collect();
        subsets.sort_by_key(|s| (s.len(), s.members().collect::<Vec<_>>()));
        let _ = writeln!(out, "  {:<14} {:>10} {:>10}", "subset", "mu", "mobius");
        for s in subsets {
            let _ = writeln!(
                out,
                "  {:<14} {:>10.4} {:>10.4}",
                format!("{{{}}}", s.label()),
                c.capacity.value(s),
                c.mobius.value(s)
            );
        }
        let _ = writeln!(out, "  Shapley values");
        for (i, s) in c.shapley.iter().enumerate() {
            let _ = writeln!(out, "    S({}) {:>10.4}", i + 1, s);
        }
        let _ = writeln!(out, "  Interaction indices");
        for (k, v) in &c.interactions {
            let _ = writeln!(out, "    I({k}) {:>10.4}", v);
        }
    }
}

pub fn estimate_text(doc: &ResultDocument) -> String {
    let e = &doc.estimate;
    let mut out = String::new();
    let _ = writeln!(out, "Choquet-integral multinomial probit");
    let _ = writeln!(out, "observations        {}", e.n_obs);
    let _ = writeln!(out, "alternatives        {}", doc.spec.n_alternatives);
    let _ = writeln!(out, "free parameters     {}", e.k);
    let _ = writeln!(out, "log-likelihood      {:.4}", e.loglik);
    let _ = writeln!(out, "  at start          {:.4}", e.loglik_start);
    let _ = writeln!(out, "AIC                 {:.4}", e.aic);
    let _ = writeln!(out, "status              {} after {} iterations", status_text(e.status), e.iterations);
    let _ = writeln!(out, "KKT residual        {:.3e}", e.kkt_residual);
    let _ = writeln!(out, "max violation       {:.3e}", e.max_violation);
    let _ = writeln!(out, "active constraints  {}", e.active_constraints.len());
    let se = match e.se_status {
        SeStatus::Computed => "computed",
        SeStatus::NotRequested => "not requested",
        SeStatus::SingularHessian => "unavailable (reduced Hessian not positive definite)",
    };
    let _ = writeln!(out, "standard errors     {se}");
    let _ = writeln!(out, "draws               {}", doc.optimizer.draws.n_draws);
    let w = doc.parameters.iter().map(|p| p.name.len()).max().unwrap_or(4).max(9);
    let _ = writeln!(out, "\n{:<w$} {:>12} {:>12} {:>9}", "parameter", "estimate", "std.err", "t");
    for p in &doc.parameters {
        let _ = writeln!(
            out,
            "{:<w$} {:>12.5} {} {}",
            p.name,
            p.estimate,
            opt(p.std_error, 12, 5),
            opt(p.t_stat, 9, 3)
        );
    }
    if e.std_errors.iter().any(Option::is_none) && e.se_status == SeStatus::Computed {
        let _ = writeln!(out, "(- : parameter on an active monotonicity constraint)");
    }
    capacity_text(&mut out, &doc.capacities);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffectSummary {
    pub attribute: String,
    pub column: String,
    pub pct_change: f64,
    /// 1-based.
    pub changed_alternatives: Vec<usize>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub quantile_levels: Vec<f64>,
    /// `[alternative][quantile]`.
    pub quantiles: Vec<Vec<f64>>,
}

impl MarginalEffectSummary {
    pub fn new(attribute: &str, me: &MarginalEffects) -> Self {
        let n = me.changes.len();
        Self {
            attribute: attribute.to_string(),
            column: me.column.clone(),
            pct_change: me.pct_change,
            changed_alternatives: me.changed_alternatives.iter().map(|a| a + 1).collect(),
            mean: (0..n).map(|a| me.mean(a)).collect(),
            sd: (0..n).map(|a| me.sd(a)).collect(),
            quantile_levels: ME_QUANTILES.to_vec(),
            quantiles: me.quantile_table(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub capacities: Vec<CapacitySummary>,
    /// Sum of Shapley values per group; 1 up to rounding for a normalized
    /// capacity.
    pub shapley_sums: Vec<f64>,
    pub marginal_effects: Vec<MarginalEffectSummary>,
}

pub fn analysis_text(doc: &AnalysisDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Capacity analysis");
    for (g, s) in doc.shapley_sums.iter().enumerate() {
        let _ = writeln!(out, "  group {}: Shapley values sum to {:.6}", g + 1, s);
    }
    capacity_text(&mut out, &doc.capacities);
    for me in &doc.marginal_effects {
        let alts: Vec<String> = me.changed_alternatives.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "\nMarginal effects: {} ({}) changed by {:+.1}% for alternative(s) {}",
            me.attribute,
            me.column,
            me.pct_change * 100.0,
            alts.join(", ")
        );
        let _ = write!(out, "  {:<6} {:>9} {:>9}", "alt", "mean", "sd");
        for q in &me.quantile_levels {
            let _ = write!(out, " {:>8}", format!("q{:.0}", q * 100.0));
        }
        let _ = writeln!(out);
        for a in 0..me.mean.len() {
            let _ = write!(out, "  {:<6} {:>9.5} {:>9.5}", a + 1, me.mean[a], me.sd[a]);
            for v in &me.quantiles[a] {
                let _ = write!(out, " {:>8.4}", v);
            }
            let _ = writeln!(out);
        }
    }
    out
}

pub fn montecarlo_text(r: &MonteCarloReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Monte Carlo recovery");
    let _ = writeln!(out, "replications        {}", r.replications);
    let _ = writeln!(out, "failed              {}", r.n_failed);
    let _ = writeln!(out, "not converged       {}", r.non_converged());
    let _ = writeln!(out, "\n{:<20} {:>6} {:>9} {:>9} {:>7}", "group", "params", "SDMAE", "APB(%)", "CP");
    for g in &r.groups {
        let _ = writeln!(
            out,
            "{:<20} {:>6} {} {} {}",
            g.group,
            g.n_params,
            opt(g.sdmae, 9, 4),
            opt(g.apb, 9, 2),
            opt(g.cp, 7, 3)
        );
    }
    if let Some(p) = r.me_pass_proportion {
        let _ = writeln!(out, "\nmarginal-effect cells with t < 1.96: {:.1}%", p * 100.0);
    }
    if let Some(g) = r.group("shapley_interaction") {
        let _ = writeln!(out, "\n{:<12} {:>9} {:>9}", "index", "true", "mean est");
        for ((name, t), m) in r.shapley_group_names.iter().zip(&g.truth).zip(&g.mean_estimate) {
            let _ = writeln!(out, "{:<12} {:>9.4} {:>9.4}", name, t, m);
        }
    }
    let _ = writeln!(
        out,
        "\n{:>4} {:<24} {:>5} {:>12} {:>12} {:>12}",
        "rep", "status", "iter", "loglik", "loglik_true", "AIC"
    );
    for o in &r.outcomes {
        let e = &o.estimate;
        let _ = writeln!(
            out,
            "{:>4} {:<24} {:>5} {:>12.3} {:>12.3} {:>12.3}",
            o.replication,
            status_text(e.status),
            e.iterations,
            e.loglik,
            o.loglik_truth,
            e.aic
        );
    }
    for f in &r.failures {
        let _ = writeln!(out, "{:>4} failed: {}", f.replication, f.message);
    }
    out
}
