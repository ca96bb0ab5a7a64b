//! Run configuration: one TOML file with a section per concern.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use choquet_probit_core::estimator::OptimizerConfig;
use choquet_probit_core::mnp::{CovParameterization, ErrorKind, ErrorStructure};
use choquet_probit_core::simulation::{DgpConfig, DgpVariant, EstimationPlan, MarginalEffectScenario};
use choquet_probit_core::utility::UtilitySpec;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSection {
    pub kind: ErrorKind,
    #[serde(default)]
    pub parameterization: CovParameterization,
}

impl Default for ErrorSection {
    fn default() -> Self {
        Self {
            kind: ErrorKind::Iid,
            parameterization: CovParameterization::default(),
        }
    }
}

impl ErrorSection {
    pub fn structure(&self, n_alternatives: usize) -> CliResult<ErrorStructure> {
        Ok(ErrorStructure::new(self.kind, self.parameterization, n_alternatives)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSection {
    /// 4 or 6.
    pub attributes: usize,
    pub variant: DgpVariant,
}

/// Data-generating process: a preset or a fully custom configuration,
/// with optional overrides of the sample sizes and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<DgpConfig>,
    pub n_individuals: usize,
    #[serde(default = "one")]
    pub n_tasks: usize,
    pub replications: usize,
    pub seed: u64,
    /// Replication written by `simulate`.
    #[serde(default)]
    pub replication: usize,
}

fn one() -> usize {
    1
}

impl DgpSection {
    pub fn resolve(&self) -> CliResult<DgpConfig> {
        let mut cfg = match (&self.preset, &self.custom) {
            (Some(p), None) => DgpConfig::preset(p.attributes, p.variant, self.n_individuals, self.replications, self.seed)?,
            (None, Some(c)) => c.clone(),
            _ => {
                return Err(CliError::Config(
                    "[dgp] needs exactly one of `preset` or `custom`".into(),
                ))
            }
        };
        cfg.n_individuals = self.n_individuals;
        cfg.n_tasks = self.n_tasks;
        cfg.replications = self.replications;
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    #[serde(default)]
    pub start_at_truth: bool,
    #[serde(default)]
    pub marginal_effects: Vec<MarginalEffectScenario>,
    /// 0-based alternatives whose attribute is changed; empty means the
    /// first.
    #[serde(default)]
    pub changed_alternatives: Vec<usize>,
    /// Sample size and replication count used with `--full-scale`.
    #[serde(default = "full_n")]
    pub full_scale_individuals: usize,
    #[serde(default = "full_r")]
    pub full_scale_replications: usize,
}

fn full_n() -> usize {
    3000
}

fn full_r() -> usize {
    50
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            start_at_truth: false,
            marginal_effects: Vec::new(),
            changed_alternatives: Vec::new(),
            full_scale_individuals: full_n(),
            full_scale_replications: full_r(),
        }
    }
}

impl MonteCarloSection {
    pub fn plan(&self, optimizer: &OptimizerConfig) -> EstimationPlan {
        EstimationPlan {
            optimizer: optimizer.clone(),
            start_at_truth: self.start_at_truth,
            marginal_effects: self.marginal_effects.clone(),
            changed_alternatives: self.changed_alternatives.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<PathBuf>,
    #[serde(default)]
    pub marginal_effects: Vec<MarginalEffectScenario>,
    #[serde(default)]
    pub changed_alternatives: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<UtilitySpec>,
    #[serde(default)]
    pub error: ErrorSection,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dgp: Option<DgpSection>,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        // relative paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(d) = &mut cfg.data {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        if let Some(r) = &mut cfg.analyze.result {
            if r.is_relative() {
                *r = base.join(&*r);
            }
        }
        cfg.optimizer.validate()?;
        Ok(cfg)
    }

    pub fn model_spec(&self) -> CliResult<&UtilitySpec> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [model] section".into()))
    }

    pub fn dgp(&self) -> CliResult<&DgpSection> {
        self.dgp
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [dgp] section".into()))
    }

    /// The default template: the four-attribute min-max/IID configuration
    /// at desk scale, with its model matching the DGP.
    pub fn template() -> CliResult<Self> {
        let dgp = DgpSection {
            preset: Some(PresetSection {
                attributes: 4,
                variant: DgpVariant::CiIid,
            }),
            custom: None,
            n_individuals: 1500,
            n_tasks: 1,
            replications: 10,
            seed: 20240601,
            replication: 0,
        };
        let resolved = dgp.resolve()?;
        Ok(Self {
            data: Some(DataSection {
                path: PathBuf::from("out/dataset.csv"),
            }),
            model: Some(resolved.spec.clone()),
            error: ErrorSection {
                kind: resolved.error.kind,
                parameterization: resolved.error.parameterization,
            },
            optimizer: OptimizerConfig::default(),
            dgp: Some(dgp),
            montecarlo: MonteCarloSection {
                marginal_effects: ["x1", "x2", "x3", "x4"]
                    .iter()
                    .zip([-0.25, -0.20, -0.28, 0.25])
                    .map(|(a, p)| MarginalEffectScenario {
                        attribute: a.to_string(),
                        pct_change: p,
                    })
                    .collect(),
                ..MonteCarloSection::default()
            },
            analyze: AnalyzeSection {
                result: Some(PathBuf::from("out/result.json")),
                marginal_effects: vec![MarginalEffectScenario {
                    attribute: "x1".into(),
                    pct_change: -0.1,
                }],
                changed_alternatives: Vec::new(),
            },
        })
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }
}
