//! Data-generating processes and recovery metrics.
//!
//! A [`DgpConfig`] couples a utility specification with true parameter
//! values. Datasets are generated through the same utility pipeline used in
//! estimation, so the true parameter vector lives in the estimator's packing
//! and recovery metrics compare like with like.

mod metrics;
mod montecarlo;

pub use metrics::{
    apb, coverage_probability, marginal_effect_ttest, marginal_effects, pooled_coverage, sdmae,
    MarginalEffects, ME_QUANTILES, T_CRITICAL,
};
pub use montecarlo::{
    aggregate, run_monte_carlo, run_replication, shapley_group, EstimationPlan, GroupMetrics, MarginalEffectScenario,
    MarginalEffectTest, MonteCarloReport, ReplicationFailure, ReplicationOutcome,
};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Open01, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{ChoiceDataset, ChoiceTask};
use crate::error::{Error, Result};
use crate::fuzzy::{Capacity, SubsetId};
use crate::linalg::Matrix;
use crate::math::normal_quantile;
use crate::membership::{CutoffParameterization, Direction, MembershipShape};
use crate::mnp::{CovParameterization, ErrorKind, ErrorStructure};
use crate::utility::{CiAttribute, CiScale, Model, ModelParams, Normalization, ParameterVector, UtilitySpec};

/// True parameter values of a DGP.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrueParameters {
    /// Capacity lattice (`2^G` values, mask order) per capacity group.
    pub capacities: Vec<Vec<f64>>,
    /// Cut-off points per CI attribute; empty for attributes without
    /// estimated cut-offs.
    #[cfg_attr(feature = "serde", serde(default))]
    pub cutoff_points: Vec<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub betas: Vec<f64>,
    /// One per alternative, the first zero.
    pub ascs: Vec<f64>,
    /// Differenced covariance `Θ̃` (rows), top-left element 1.
    pub error_covariance: Vec<Vec<f64>>,
    /// CI scale `λ`.
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub scale: f64,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DgpConfig {
    pub n_individuals: usize,
    #[cfg_attr(feature = "serde", serde(default = "one_task"))]
    pub n_tasks: usize,
    /// Attributes are drawn independently from `U(low, high)`.
    pub attribute_low: f64,
    pub attribute_high: f64,
    /// Generation spec; also the spec estimated in Monte Carlo runs.
    pub spec: UtilitySpec,
    pub error: ErrorStructure,
    pub truth: TrueParameters,
    pub replications: usize,
    pub seed: u64,
}

#[cfg(feature = "serde")]
fn one_task() -> usize {
    1
}

/// Preset DGP families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DgpVariant {
    /// Min-max normalization, IID errors.
    CiIid,
    /// Estimated cut-offs, free error diagonal.
    CicDe,
    /// Estimated cut-offs, full error covariance.
    CicFe,
    /// Weighted sum of min-max normalized attributes with the singleton
    /// capacity values as coefficients, written as an additive capacity with
    /// an estimated scale. IID errors.
    WsIid,
}

/// Six-attribute capacity: singletons, pairs, triples, quadruples,
/// quintuples and the full set.
const SIX_ATTRIBUTE_CAPACITY: [(&str, f64); 63] = [
    ("1", 0.17),
    ("2", 0.18),
    ("3", 0.20),
    ("4", 0.16),
    ("5", 0.19),
    ("6", 0.18),
    ("1,2", 0.33),
    ("1,3", 0.35),
    ("1,4", 0.31),
    ("1,5", 0.34),
    ("1,6", 0.33),
    ("2,3", 0.36),
    ("2,4", 0.32),
    ("2,5", 0.35),
    ("2,6", 0.34),
    ("3,4", 0.34),
    ("3,5", 0.37),
    ("3,6", 0.36),
    ("4,5", 0.33),
    ("4,6", 0.32),
    ("5,6", 0.35),
    ("1,2,3", 0.51),
    ("1,2,4", 0.47),
    ("1,2,5", 0.50),
    ("1,2,6", 0.49),
    ("1,3,4", 0.49),
    ("1,3,5", 0.52),
    ("1,3,6", 0.51),
    ("1,4,5", 0.48),
    ("1,4,6", 0.47),
    ("1,5,6", 0.50),
    ("2,3,4", 0.50),
    ("2,3,5", 0.53),
    ("2,3,6", 0.52),
    ("2,4,5", 0.49),
    ("2,4,6", 0.48),
    ("2,5,6", 0.51),
    ("3,4,5", 0.51),
    ("3,4,6", 0.50),
    ("3,5,6", 0.53),
    ("4,5,6", 0.49),
    ("1,2,3,4", 0.65),
    ("1,2,3,5", 0.68),
    ("1,2,3,6", 0.67),
    ("1,2,4,5", 0.64),
    ("1,2,4,6", 0.63),
    ("1,2,5,6", 0.66),
    ("1,3,4,5", 0.66),
    ("1,3,4,6", 0.65),
    ("1,3,5,6", 0.68),
    ("1,4,5,6", 0.64),
    ("2,3,4,5", 0.67),
    ("2,3,4,6", 0.66),
    ("2,3,5,6", 0.69),
    ("2,4,5,6", 0.65),
    ("3,4,5,6", 0.67),
    ("1,2,3,4,5", 0.82),
    ("1,2,3,4,6", 0.81),
    ("1,2,3,5,6", 0.84),
    ("1,2,4,5,6", 0.80),
    ("1,3,4,5,6", 0.82),
    ("2,3,4,5,6", 0.83),
    ("1,2,3,4,5,6", 1.00),
];

const FOUR_ATTRIBUTE_CAPACITY: [(&str, f64); 15] = [
    ("1", 0.3),
    ("2", 0.25),
    ("3", 0.2),
    ("4", 0.1),
    ("1,2", 0.58),
    ("1,3", 0.53),
    ("1,4", 0.44),
    ("2,3", 0.49),
    ("2,4", 0.36),
    ("3,4", 0.33),
    ("1,2,3", 0.79),
    ("1,2,4", 0.68),
    ("1,3,4", 0.64),
    ("2,3,4", 0.59),
    ("1,2,3,4", 1.0),
];

/// Cut-off shape and points per attribute (half-triangular attributes act
/// as disutilities).
const CUTOFFS: [(MembershipShape, &[f64]); 6] = [
    (MembershipShape::HalfTriangularDecreasing, &[3.0, 7.0]),
    (MembershipShape::HalfTriangularDecreasing, &[3.5, 6.5]),
    (MembershipShape::Trapezoidal, &[2.0, 4.0, 6.0, 7.0]),
    (MembershipShape::Trapezoidal, &[3.5, 5.5, 7.5, 8.5]),
    (MembershipShape::HalfTriangularDecreasing, &[3.3, 6.8]),
    (MembershipShape::Trapezoidal, &[2.5, 5.0, 6.5, 7.5]),
];

const ASCS: [f64; 5] = [0.0, -0.7, -0.6, -0.5, -0.4];

/// The four-attribute differenced error covariance.
pub fn four_attribute_error_covariance() -> Vec<Vec<f64>> {
    let d = [1.0, 1.1, 1.2, 1.3];
    (0..4)
        .map(|i| (0..4).map(|j| if i == j { d[i] } else { 0.5 }).collect())
        .collect()
}

/// The true capacity of the four- (`g = 4`) or six-attribute (`g = 6`)
/// configuration.
pub fn preset_capacity(g: usize) -> Result<Capacity> {
    match g {
        4 => Capacity::from_labeled(4, &FOUR_ATTRIBUTE_CAPACITY),
        6 => Capacity::from_labeled(6, &SIX_ATTRIBUTE_CAPACITY),
        _ => Err(Error::InvalidSpec(format!("preset capacities exist for 4 or 6 attributes, not {g}"))),
    }
}

impl DgpConfig {
    /// The four- or six-attribute configuration with five alternatives,
    /// `x ~ U(1, 10)` and one task per individual.
    pub fn preset(g: usize, variant: DgpVariant, n_individuals: usize, replications: usize, seed: u64) -> Result<Self> {
        let capacity = preset_capacity(g)?;
        let n = 5;
        let mut ci_attributes = Vec::with_capacity(g);
        let mut cutoff_points = Vec::with_capacity(g);
        for (i, (shape, points)) in CUTOFFS.iter().take(g).enumerate() {
            let normalization = match variant {
                DgpVariant::CiIid | DgpVariant::WsIid => Normalization::MinMax {
                    direction: Direction::Positive,
                },
                DgpVariant::CicDe | DgpVariant::CicFe => Normalization::Cutoff {
                    shape: *shape,
                    covariates: Vec::new(),
                    vary_first_point: false,
                    groups: None,
                },
            };
            cutoff_points.push(match variant {
                DgpVariant::CicDe | DgpVariant::CicFe => points.to_vec(),
                _ => Vec::new(),
            });
            ci_attributes.push(CiAttribute {
                name: format!("x{}", i + 1),
                column: format!("x{}", i + 1),
                normalization,
            });
        }
        let (kind, error_covariance) = match variant {
            DgpVariant::CiIid | DgpVariant::WsIid => (ErrorKind::Iid, crate::mnp::iid_matrix(n - 1).to_rows()),
            DgpVariant::CicDe => (ErrorKind::Diagonal, four_attribute_error_covariance()),
            DgpVariant::CicFe => (ErrorKind::Full, four_attribute_error_covariance()),
        };
        let (capacities, scale, ci_scale) = if variant == DgpVariant::WsIid {
            let betas: Vec<f64> = (0..g).map(|i| capacity.value(SubsetId::singleton(i))).collect();
            let total: f64 = betas.iter().sum();
            let weights: Vec<f64> = betas.iter().map(|b| b / total).collect();
            (vec![Capacity::additive(&weights)?.values().to_vec()], total, CiScale::Estimated)
        } else {
            (vec![capacity.values().to_vec()], 1.0, CiScale::Fixed(1.0))
        };
        let cfg = Self {
            n_individuals,
            n_tasks: 1,
            attribute_low: 1.0,
            attribute_high: 10.0,
            spec: UtilitySpec {
                n_alternatives: n,
                asc: true,
                ws_terms: Vec::new(),
                ci_attributes,
                capacity_mode: Default::default(),
                ci_scale,
            },
            error: ErrorStructure::new(kind, CovParameterization::FreeCholeskyTopLeftFixed, n)?,
            truth: TrueParameters {
                capacities,
                cutoff_points,
                betas: Vec::new(),
                ascs: ASCS.to_vec(),
                error_covariance,
                scale,
            },
            replications,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Attribute columns, in first-use order over CI attributes then
    /// weighted-sum terms.
    pub fn column_names(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        let names = self
            .spec
            .ci_attributes
            .iter()
            .map(|a| &a.column)
            .chain(self.spec.ws_terms.iter().map(|t| &t.column));
        for c in names {
            if !cols.contains(c) {
                cols.push(c.clone());
            }
        }
        cols
    }

    fn error_matrix(&self) -> Result<Matrix> {
        Matrix::from_rows(&self.truth.error_covariance)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_individuals == 0 || self.n_tasks == 0 {
            return bad("n_individuals and n_tasks must be positive".into());
        }
        if !(self.attribute_low.is_finite() && self.attribute_high.is_finite() && self.attribute_low < self.attribute_high) {
            return bad(format!(
                "attribute range must satisfy low < high, got ({}, {})",
                self.attribute_low, self.attribute_high
            ));
        }
        self.spec.validate()?;
        for a in &self.spec.ci_attributes {
            if let Normalization::Cutoff { covariates, groups, .. } = &a.normalization {
                if !covariates.is_empty() || groups.is_some() {
                    return bad(format!(
                        "attribute `{}`: generated cut-offs are constant; covariates and groups are not supported",
                        a.name
                    ));
                }
            }
        }
        let truth = &self.truth;
        if truth.capacities.len() != self.spec.n_capacity_groups() {
            return bad(format!(
                "expected {} true capacities, got {}",
                self.spec.n_capacity_groups(),
                truth.capacities.len()
            ));
        }
        for c in &truth.capacities {
            Capacity::new(self.spec.g(), c.clone())?;
        }
        let n = self.spec.n_alternatives;
        if truth.ascs.len() != n || truth.ascs[0] != 0.0 {
            return bad(format!("expected {n} true ASCs with the first equal to 0"));
        }
        if truth.betas.len() != self.spec.ws_terms.len() {
            return bad(format!("expected {} true betas, got {}", self.spec.ws_terms.len(), truth.betas.len()));
        }
        let theta = self.error_matrix()?;
        if theta.rows() != n - 1 || theta.cols() != n - 1 {
            return bad(format!("error covariance must be {0}×{0}", n - 1));
        }
        theta.cholesky()?;
        self.error.params_from_base(&theta)?;
        self.true_parameters()?;
        Ok(())
    }

    /// Compiled model over the generated columns.
    pub fn model(&self) -> Result<Model> {
        Model::compile(&self.spec, self.error, &self.column_names())
    }

    /// The true parameter vector in the packing of [`model`](Self::model).
    pub fn true_parameters(&self) -> Result<ParameterVector> {
        let model = self.model()?;
        let g = self.spec.g();
        let mobius = self
            .truth
            .capacities
            .iter()
            .map(|c| Ok(Capacity::new(g, c.clone())?.to_mobius()))
            .collect::<Result<Vec<_>>>()?;
        let mut cutoffs = Vec::with_capacity(g);
        for (i, a) in self.spec.ci_attributes.iter().enumerate() {
            match &a.normalization {
                Normalization::Cutoff { shape, .. } => {
                    let points = self.truth.cutoff_points.get(i).ok_or_else(|| {
                        Error::InvalidSpec(format!("attribute `{}` needs true cut-off points", a.name))
                    })?;
                    let p = CutoffParameterization::from_points(*shape, points)?;
                    cutoffs.push(vec![p.coefficients]);
                }
                _ => cutoffs.push(Vec::new()),
            }
        }
        let params = ModelParams {
            mobius,
            cutoffs,
            betas: self.truth.betas.clone(),
            ascs: self.truth.ascs.clone(),
            error: self.error.params_from_base(&self.error_matrix()?)?,
            scale: match self.spec.ci_scale {
                CiScale::Fixed(l) => l,
                CiScale::Estimated => self.truth.scale,
            },
        };
        Ok(ParameterVector {
            names: model.names().to_vec(),
            values: model.pack(&params)?,
        })
    }
}

/// The random stream of one replication.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Draws one dataset. Attributes are independent `U(low, high)`; errors are
/// `ε_1 = 0` and `(ε_2, …, ε_I) ~ N(0, Θ̃)`; the chosen alternative maximizes
/// utility (ties to the lowest index). Deterministic in
/// `(cfg.seed, replication)`.
pub fn generate_dataset(cfg: &DgpConfig, replication: usize) -> Result<(ChoiceDataset, ParameterVector)> {
    cfg.validate()?;
    let truth = cfg.true_parameters()?;
    let model = cfg.model()?;
    let ev = model.evaluator(&truth.values)?;
    let columns = cfg.column_names();
    let n_cols = columns.len();
    let n = cfg.spec.n_alternatives;
    let chol = cfg.error_matrix()?.cholesky()?;
    let mut rng = replication_rng(cfg.seed, replication);
    let unif = Uniform::new(cfg.attribute_low, cfg.attribute_high)
        .map_err(|e| Error::InvalidSpec(format!("attribute range: {e}")))?;
    let mut tasks = Vec::with_capacity(cfg.n_individuals * cfg.n_tasks);
    let mut v = vec![0.0; n];
    let mut z = vec![0.0; n - 1];
    for ind in 0..cfg.n_individuals {
        for t in 0..cfg.n_tasks {
            let values: Vec<f64> = (0..n * n_cols).map(|_| unif.sample(&mut rng)).collect();
            for zk in z.iter_mut() {
                let u: f64 = Open01.sample(&mut rng);
                *zk = normal_quantile(u);
            }
            let mut task = ChoiceTask {
                individual: ind as u64 + 1,
                task: t as u64 + 1,
                available: vec![true; n],
                values,
                chosen: 0,
            };
            ev.utilities(&task, &mut v)?;
            let mut best = v[0];
            for i in 1..n {
                let eps: f64 = (0..i).map(|k| chol[(i - 1, k)] * z[k]).sum();
                let u = v[i] + eps;
                if u > best {
                    best = u;
                    task.chosen = i;
                }
            }
            tasks.push(task);
        }
    }
    Ok((ChoiceDataset::new(columns, n, tasks)?, truth))
}
