use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use choquet_probit_core::estimator::{estimate_model, ConvergenceStatus};
use choquet_probit_core::simulation::{generate_dataset, marginal_effects, run_monte_carlo, DgpConfig};
use choquet_probit_core::utility::{Model, ParameterVector};

use crate::config::RunConfig;
use crate::csv_io::{read_dataset, write_dataset};
use crate::error::{CliError, CliResult};
use crate::report::{
    analysis_text, capacity_summaries, estimate_text, montecarlo_text, read_json, write_json, AnalysisDocument,
    MarginalEffectSummary, ResultDocument,
};

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub draws: Option<usize>,
    pub seed: Option<u64>,
    pub full_scale: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(d) = self.draws {
            cfg.optimizer.draws.n_draws = d;
        }
        if let Some(dgp) = &mut cfg.dgp {
            if let Some(s) = self.seed {
                dgp.seed = s;
            }
            if self.full_scale {
                dgp.n_individuals = cfg.montecarlo.full_scale_individuals;
                dgp.replications = cfg.montecarlo.full_scale_replications;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    NotConverged,
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    started_unix_seconds: u64,
    elapsed_seconds: f64,
    threads: usize,
}

fn write_metadata(out: &Path, command: &str, started: SystemTime, clock: Instant) -> CliResult<()> {
    let meta = Metadata {
        command,
        version: env!("CARGO_PKG_VERSION"),
        started_unix_seconds: started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    write_json(&out.join("metadata.json"), &meta)
}

fn ensure_dir(out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(CliError::io(out))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// Writes the template config to `path`; refuses to overwrite unless
/// `force`.
pub fn init(path: &Path, force: bool) -> CliResult<()> {
    if path.exists() && !force {
        return Err(CliError::Config(format!(
            "{} already exists (use --force to overwrite)",
            path.display()
        )));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let text = RunConfig::template()?.to_toml()?;
    write_text(path, &text)
}

#[derive(Serialize)]
struct TruthDocument<'a> {
    replication: usize,
    dgp: &'a DgpConfig,
    parameters: &'a ParameterVector,
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    let section = cfg.dgp()?;
    let dgp = section.resolve()?;
    ensure_dir(out)?;
    let (data, truth) = generate_dataset(&dgp, section.replication)?;
    write_dataset(&out.join("dataset.csv"), &data)?;
    write_json(
        &out.join("truth.json"),
        &TruthDocument {
            replication: section.replication,
            dgp: &dgp,
            parameters: &truth,
        },
    )?;
    write_metadata(out, "simulate", started, clock)?;
    Ok(Outcome::Done)
}

pub fn estimate(cfg: &RunConfig, data_path: Option<&Path>, out: &Path) -> CliResult<Outcome> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    let spec = cfg.model_spec()?;
    spec.validate()?;
    let err = cfg.error.structure(spec.n_alternatives)?;
    let path = data_path
        .map(Path::to_path_buf)
        .or_else(|| cfg.data.as_ref().map(|d| d.path.clone()))
        .ok_or_else(|| CliError::Config("no data file: pass --data or set [data] path".into()))?;
    let data = read_dataset(&path)?;
    if data.n_alternatives != spec.n_alternatives {
        return Err(CliError::Data(format!(
            "{}: {} alternatives in the data but the model has {}",
            path.display(),
            data.n_alternatives,
            spec.n_alternatives
        )));
    }
    let model = Model::compile(spec, err, &data.column_names)?;
    let start = model.feasible_start(&data)?;
    let est = estimate_model(&model, &data, &start, &cfg.optimizer)?;
    let converged = est.status == ConvergenceStatus::Converged;
    let doc = ResultDocument::new(&model, &data, &cfg.optimizer, est)?;
    ensure_dir(out)?;
    write_json(&out.join("result.json"), &doc)?;
    write_text(&out.join("report.txt"), &estimate_text(&doc))?;
    write_metadata(out, "estimate", started, clock)?;
    Ok(if converged { Outcome::Done } else { Outcome::NotConverged })
}

pub fn analyze(cfg: &RunConfig, result_path: Option<&Path>, data_path: Option<&Path>, out: &Path) -> CliResult<Outcome> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    let path: PathBuf = result_path
        .map(Path::to_path_buf)
        .or_else(|| cfg.analyze.result.clone())
        .ok_or_else(|| CliError::Config("no result file: pass --result or set [analyze] result".into()))?;
    let doc: ResultDocument = read_json(&path)?;
    let model = doc.model()?;
    let theta = &doc.estimate.theta;
    let capacities = capacity_summaries(&model, theta)?;
    let shapley_sums = capacities.iter().map(|c| c.shapley.iter().sum()).collect();

    let mut effects = Vec::new();
    if !cfg.analyze.marginal_effects.is_empty() {
        let dpath = data_path
            .map(Path::to_path_buf)
            .or_else(|| cfg.data.as_ref().map(|d| d.path.clone()))
            .ok_or_else(|| CliError::Config("marginal effects need data: pass --data or set [data] path".into()))?;
        let data = read_dataset(&dpath)?;
        if data.column_names != doc.column_names {
            return Err(CliError::Data(format!(
                "{}: columns differ from those used for the estimate",
                dpath.display()
            )));
        }
        let changed = if cfg.analyze.changed_alternatives.is_empty() {
            vec![0]
        } else {
            cfg.analyze.changed_alternatives.clone()
        };
        for sc in &cfg.analyze.marginal_effects {
            let me = marginal_effects(&model, theta, &data, &sc.attribute, sc.pct_change, &changed, &cfg.optimizer.draws)?;
            effects.push(MarginalEffectSummary::new(&sc.attribute, &me));
        }
    }
    let analysis = AnalysisDocument {
        capacities,
        shapley_sums,
        marginal_effects: effects,
    };
    ensure_dir(out)?;
    write_json(&out.join("analysis.json"), &analysis)?;
    write_text(&out.join("analysis.txt"), &analysis_text(&analysis))?;
    write_metadata(out, "analyze", started, clock)?;
    Ok(Outcome::Done)
}

pub fn montecarlo(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    let dgp = cfg.dgp()?.resolve()?;
    let plan = cfg.montecarlo.plan(&cfg.optimizer);
    let report = run_monte_carlo(&dgp, &plan)?;
    ensure_dir(out)?;
    write_json(&out.join("montecarlo.json"), &report)?;
    write_text(&out.join("montecarlo.txt"), &montecarlo_text(&report))?;
    write_metadata(out, "montecarlo", started, clock)?;
    Ok(if report.n_failed == 0 && report.non_converged() == 0 {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}
