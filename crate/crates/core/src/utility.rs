//! Utility specifications, the packed parameter layout and systematic
//! utilities.
//!
//! The systematic utility of alternative `i` is
//! `V_i = ASC_i + Σ_k β_k w_ik + λ · CI(x_N^i; μ_group(i))`, where the
//! normalized attributes `x_N^i` come from each attribute's normalization
//! rule. Parameters are packed in the order: Möbius values per capacity
//! group, cut-off coefficients per attribute and cut-off group, weighted-sum
//! coefficients, ASCs, error-structure parameters, `ln λ`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::choquet::choquet_unchecked;
use crate::dataset::{ChoiceDataset, ChoiceTask};
use crate::error::{Error, Result};
use crate::fuzzy::{build_constraints, mobius_to_capacity, LinearRow, MobiusVector, SubsetId};
use crate::membership::{minmax_into, resolve_into, Direction, MembershipFunction, MembershipShape};
use crate::math::{exp, ln};
use crate::mnp::ErrorStructure;

/// A weighted-sum term: one coefficient on `column`, shared by the listed
/// alternatives (0-based; `None` means all).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WsTerm {
    pub name: String,
    pub column: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub alternatives: Option<Vec<usize>>,
}

/// How an attribute is mapped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Normalization {
    /// Range normalization across the alternatives of each task.
    MinMax { direction: Direction },
    /// A membership function with known cut-off points.
    Fixed { shape: MembershipShape, points: Vec<f64> },
    /// A membership function whose cut-off points are estimated through the
    /// cumulative log-link. `covariates` are demographic columns (the
    /// intercept is implicit). Unless `vary_first_point` is set, the first
    /// point is constant-only. `groups` gives a cut-off group per
    /// alternative for alternative-specific cut-offs.
    Cutoff {
        shape: MembershipShape,
        #[cfg_attr(feature = "serde", serde(default))]
        covariates: Vec<String>,
        #[cfg_attr(feature = "serde", serde(default))]
        vary_first_point: bool,
        #[cfg_attr(feature = "serde", serde(default))]
        groups: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CiAttribute {
    pub name: String,
    pub column: String,
    pub normalization: Normalization,
}

/// Generic capacity, or one capacity per group with a group index for each
/// alternative.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CapacityMode {
    #[default]
    Generic,
    AlternativeSpecific(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CiScale {
    Fixed(f64),
    Estimated,
}

impl Default for CiScale {
    fn default() -> Self {
        CiScale::Fixed(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UtilitySpec {
    pub n_alternatives: usize,
    /// Alternative-specific constants for alternatives 2..I; the first is
    /// fixed at zero.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub asc: bool,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ws_terms: Vec<WsTerm>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ci_attributes: Vec<CiAttribute>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub capacity_mode: CapacityMode,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ci_scale: CiScale,
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

impl UtilitySpec {
    pub fn g(&self) -> usize {
        self.ci_attributes.len()
    }

    pub fn n_capacity_groups(&self) -> usize {
        if self.ci_attributes.is_empty() {
            return 0;
        }
        match &self.capacity_mode {
            CapacityMode::Generic => 1,
            CapacityMode::AlternativeSpecific(g) => g.iter().max().map_or(0, |m| m + 1),
        }
    }

    fn capacity_group_of(&self) -> Vec<usize> {
        match &self.capacity_mode {
            CapacityMode::Generic => vec![0; self.n_alternatives],
            CapacityMode::AlternativeSpecific(g) => g.clone(),
        }
    }

    /// Structural checks that need no data.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_alternatives;
        if n < 2 {
            return Err(Error::InvalidSpec(format!("need at least two alternatives, got {n}")));
        }
        if !self.ci_attributes.is_empty() {
            crate::fuzzy::check_attribute_count(self.g())?;
        }
        if let CapacityMode::AlternativeSpecific(groups) = &self.capacity_mode {
            check_groups(groups, n, "capacity groups")?;
        }
        if let CiScale::Fixed(l) = self.ci_scale {
            if !l.is_finite() {
                return Err(Error::InvalidSpec("CI scale must be finite".into()));
            }
        }
        for (i, a) in self.ci_attributes.iter().enumerate() {
            if self.ci_attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidSpec(format!("duplicate CI attribute `{}`", a.name)));
            }
            match &a.normalization {
                Normalization::MinMax { .. } => {}
                Normalization::Fixed { shape, points } => {
                    MembershipFunction::new(*shape, points)
                        .map_err(|e| Error::InvalidSpec(format!("attribute `{}`: {e}", a.name)))?;
                }
                Normalization::Cutoff { groups, .. } => {
                    if let Some(g) = groups {
                        check_groups(g, n, "cut-off groups")?;
                    }
                }
            }
        }
        for (i, t) in self.ws_terms.iter().enumerate() {
            if self.ws_terms[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::InvalidSpec(format!("duplicate weighted-sum term `{}`", t.name)));
            }
            if let Some(alts) = &t.alternatives {
                if alts.is_empty() || alts.iter().any(|&a| a >= n) {
                    return Err(Error::InvalidSpec(format!(
                        "term `{}`: alternatives must be nonempty and within 0..{n}",
                        t.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_groups(groups: &[usize], n: usize, what: &str) -> Result<()> {
    if groups.len() != n {
        return Err(Error::InvalidSpec(format!(
            "{what}: expected one entry per alternative ({n}), got {}",
            groups.len()
        )));
    }
    let k = groups.iter().max().map_or(0, |m| m + 1);
    if (0..k).any(|g| !groups.contains(&g)) {
        return Err(Error::InvalidSpec(format!("{what}: group indices must be contiguous from 0")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SegmentKind {
    Mobius { group: usize },
    Cutoff { attribute: usize, group: usize },
    Beta,
    Asc,
    Error,
    LogScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Segment boundaries and parameter names of the packed vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PackingMap {
    pub segments: Vec<Segment>,
    pub names: Vec<String>,
}

impl PackingMap {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn segments_of<'a>(&'a self, pred: impl Fn(&SegmentKind) -> bool + 'a) -> impl Iterator<Item = &'a Segment> + 'a {
        self.segments.iter().filter(move |s| pred(&s.kind))
    }
}

/// A packed parameter vector with its names.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Unpacked model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// One Möbius vector per capacity group.
    pub mobius: Vec<MobiusVector>,
    /// `cutoffs[attribute][group][point]` is the coefficient vector
    /// (intercept first) of that cut-off point; empty for attributes without
    /// estimated cut-offs.
    pub cutoffs: Vec<Vec<Vec<Vec<f64>>>>,
    pub betas: Vec<f64>,
    /// Length `I`, first entry 0. All zeros when the spec has no ASCs.
    pub ascs: Vec<f64>,
    pub error: Vec<f64>,
    /// The CI scale `λ`.
    pub scale: f64,
}

#[derive(Debug, Clone)]
enum CompiledNorm {
    MinMax(Direction),
    Fixed(MembershipFunction),
    Cutoff {
        shape: MembershipShape,
        covariate_cols: Vec<usize>,
        vary_first_point: bool,
        groups: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
struct CompiledAttr {
    column: usize,
    norm: CompiledNorm,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    column: usize,
    applies: Vec<bool>,
}

/// A utility specification bound to a dataset schema and error structure.
#[derive(Debug, Clone)]
pub struct Model {
    spec: UtilitySpec,
    err: ErrorStructure,
    n_columns: usize,
    attrs: Vec<CompiledAttr>,
    terms: Vec<CompiledTerm>,
    capacity_group: Vec<usize>,
    map: PackingMap,
}

fn n_cutoff_groups(groups: &[usize]) -> usize {
    groups.iter().max().map_or(1, |m| m + 1)
}

fn coeff_count(point: usize, n_cov: usize, vary_first: bool) -> usize {
    if point == 0 && !vary_first {
        1
    } else {
        1 + n_cov
    }
}

impl Model {
    /// Resolves column names against `column_names` and lays out the
    /// parameter vector.
    pub fn compile(spec: &UtilitySpec, err: ErrorStructure, column_names: &[String]) -> Result<Self> {
        spec.validate()?;
        if err.n_alternatives != spec.n_alternatives {
            return Err(Error::InvalidSpec(format!(
                "error structure has {} alternatives, utility spec has {}",
                err.n_alternatives, spec.n_alternatives
            )));
        }
        let col = |name: &str| {
            column_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::UnknownColumn(name.into()))
        };
        let n = spec.n_alternatives;
        let mut attrs = Vec::with_capacity(spec.g());
        for a in &spec.ci_attributes {
            let norm = match &a.normalization {
                Normalization::MinMax { direction } => CompiledNorm::MinMax(*direction),
                Normalization::Fixed { shape, points } => CompiledNorm::Fixed(MembershipFunction::new(*shape, points)?),
                Normalization::Cutoff {
                    shape,
                    covariates,
                    vary_first_point,
                    groups,
                } => CompiledNorm::Cutoff {
                    shape: *shape,
                    covariate_cols: covariates.iter().map(|c| col(c)).collect::<Result<_>>()?,
                    vary_first_point: *vary_first_point,
                    groups: groups.clone().unwrap_or_else(|| vec![0; n]),
                },
            };
            attrs.push(CompiledAttr {
                column: col(&a.column)?,
                norm,
            });
        }
        let terms = spec
            .ws_terms
            .iter()
            .map(|t| {
                let mut applies = vec![t.alternatives.is_none(); n];
                if let Some(alts) = &t.alternatives {
                    for &a in alts {
                        applies[a] = true;
                    }
                }
                Ok(CompiledTerm {
                    column: col(&t.column)?,
                    applies,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let map = Self::layout(spec, &err, &attrs);
        Ok(Self {
            spec: spec.clone(),
            err,
            n_columns: column_names.len(),
            attrs,
            terms,
            capacity_group: spec.capacity_group_of(),
            map,
        })
    }

    fn layout(spec: &UtilitySpec, err: &ErrorStructure, attrs: &[CompiledAttr]) -> PackingMap {
        let mut segments = Vec::new();
        let mut names = Vec::new();
        let mut push = |kind: SegmentKind, new: Vec<String>, segments: &mut Vec<Segment>| {
            if new.is_empty() {
                return;
            }
            segments.push(Segment {
                kind,
                start: names.len(),
                len: new.len(),
            });
            names.extend(new);
        };
        let g = spec.g();
        let n_groups = spec.n_capacity_groups();
        for group in 0..n_groups {
            let prefix = if n_groups > 1 {
                format!("m[g{}]", group + 1)
            } else {
                String::from("m")
            };
            let seg: Vec<String> = (1u32..(1 << g))
                .map(|k| format!("{prefix}[{}]", SubsetId(k).label()))
                .collect();
            push(SegmentKind::Mobius { group }, seg, &mut segments);
        }
        for (ai, (attr, spec_attr)) in attrs.iter().zip(&spec.ci_attributes).enumerate() {
            if let CompiledNorm::Cutoff {
                shape,
                vary_first_point,
                groups,
                ..
            } = &attr.norm
            {
                let covs = match &spec_attr.normalization {
                    Normalization::Cutoff { covariates, .. } => covariates.clone(),
                    _ => Vec::new(),
                };
                let n_groups = n_cutoff_groups(groups);
                for group in 0..n_groups {
                    let mut seg = Vec::new();
                    let gname = if n_groups > 1 {
                        format!("[g{}]", group + 1)
                    } else {
                        String::new()
                    };
                    for (p, pname) in shape.point_names().iter().enumerate() {
                        seg.push(format!("cut[{}]{gname}.{pname}.const", spec_attr.name));
                        if coeff_count(p, covs.len(), *vary_first_point) > 1 {
                            for c in &covs {
                                seg.push(format!("cut[{}]{gname}.{pname}.{c}", spec_attr.name));
                            }
                        }
                    }
                    push(SegmentKind::Cutoff { attribute: ai, group }, seg, &mut segments);
                }
            }
        }
        push(
            SegmentKind::Beta,
            spec.ws_terms.iter().map(|t| t.name.clone()).collect(),
            &mut segments,
        );
        if spec.asc {
            push(
                SegmentKind::Asc,
                (2..=spec.n_alternatives).map(|i| format!("asc[{i}]")).collect(),
                &mut segments,
            );
        }
        push(SegmentKind::Error, err.param_names(), &mut segments);
        if g > 0 && spec.ci_scale == CiScale::Estimated {
            push(SegmentKind::LogScale, vec![String::from("ln_lambda")], &mut segments);
        }
        PackingMap { segments, names }
    }

    pub fn spec(&self) -> &UtilitySpec {
        &self.spec
    }

    pub fn error_structure(&self) -> &ErrorStructure {
        &self.err
    }

    pub fn packing(&self) -> &PackingMap {
        &self.map
    }

    pub fn n_params(&self) -> usize {
        self.map.len()
    }

    pub fn names(&self) -> &[String] {
        &self.map.names
    }

    pub fn g(&self) -> usize {
        self.spec.g()
    }

    pub fn n_capacity_groups(&self) -> usize {
        self.spec.n_capacity_groups()
    }

    /// Number of freely estimated parameters: packed length minus one
    /// normalization equality per capacity group.
    pub fn n_free_params(&self) -> usize {
        self.n_params() - self.n_capacity_groups()
    }

    fn segment(&self, kind: SegmentKind) -> Option<Segment> {
        self.map.segments.iter().find(|s| s.kind == kind).copied()
    }

    pub fn unpack(&self, theta: &[f64]) -> Result<ModelParams> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: self.n_params(),
                found: theta.len(),
            });
        }
        let g = self.g();
        let mobius = (0..self.n_capacity_groups())
            .map(|group| {
                let s = self.segment(SegmentKind::Mobius { group }).expect("mobius segment");
                MobiusVector::from_nonempty(g, &theta[s.range()])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cutoffs = Vec::with_capacity(self.attrs.len());
        for (ai, attr) in self.attrs.iter().enumerate() {
            let mut per_attr = Vec::new();
            if let CompiledNorm::Cutoff {
                shape,
                covariate_cols,
                vary_first_point,
                groups,
            } = &attr.norm
            {
                for group in 0..n_cutoff_groups(groups) {
                    let s = self
                        .segment(SegmentKind::Cutoff { attribute: ai, group })
                        .expect("cut-off segment");
                    let mut k = s.start;
                    let mut points = Vec::with_capacity(shape.n_points());
                    for p in 0..shape.n_points() {
                        let c = coeff_count(p, covariate_cols.len(), *vary_first_point);
                        points.push(theta[k..k + c].to_vec());
                        k += c;
                    }
                    per_attr.push(points);
                }
            }
            cutoffs.push(per_attr);
        }
        let betas = self
            .segment(SegmentKind::Beta)
            .map_or_else(Vec::new, |s| theta[s.range()].to_vec());
        let mut ascs = vec![0.0; self.spec.n_alternatives];
        if let Some(s) = self.segment(SegmentKind::Asc) {
            ascs[1..].copy_from_slice(&theta[s.range()]);
        }
        let error = self
            .segment(SegmentKind::Error)
            .map_or_else(Vec::new, |s| theta[s.range()].to_vec());
        let scale = match self.spec.ci_scale {
            CiScale::Fixed(l) => l,
            CiScale::Estimated => self
                .segment(SegmentKind::LogScale)
                .map_or(1.0, |s| exp(theta[s.start])),
        };
        Ok(ModelParams {
            mobius,
            cutoffs,
            betas,
            ascs,
            error,
            scale,
        })
    }

    pub fn pack(&self, p: &ModelParams) -> Result<Vec<f64>> {
        let mut theta = Vec::with_capacity(self.n_params());
        let mismatch = |what, expected, found| Error::DimensionMismatch { what, expected, found };
        if p.mobius.len() != self.n_capacity_groups() {
            return Err(mismatch("capacity groups", self.n_capacity_groups(), p.mobius.len()));
        }
        for m in &p.mobius {
            if m.g() != self.g() {
                return Err(mismatch("Möbius attribute count", self.g(), m.g()));
            }
            theta.extend_from_slice(m.nonempty());
        }
        if p.cutoffs.len() != self.attrs.len() {
            return Err(mismatch("cut-off attributes", self.attrs.len(), p.cutoffs.len()));
        }
        for (ai, attr) in self.attrs.iter().enumerate() {
            if let CompiledNorm::Cutoff {
                shape,
                covariate_cols,
                vary_first_point,
                groups,
            } = &attr.norm
            {
                let per_attr = &p.cutoffs[ai];
                if per_attr.len() != n_cutoff_groups(groups) {
                    return Err(mismatch("cut-off groups", n_cutoff_groups(groups), per_attr.len()));
                }
                for points in per_attr {
                    if points.len() != shape.n_points() {
                        return Err(mismatch("cut-off points", shape.n_points(), points.len()));
                    }
                    for (pi, coeffs) in points.iter().enumerate() {
                        let c = coeff_count(pi, covariate_cols.len(), *vary_first_point);
                        if coeffs.len() != c {
                            return Err(mismatch("cut-off coefficients", c, coeffs.len()));
                        }
                        theta.extend_from_slice(coeffs);
                    }
                }
            } else if !p.cutoffs[ai].is_empty() {
                return Err(mismatch("cut-off groups", 0, p.cutoffs[ai].len()));
            }
        }
        if p.betas.len() != self.spec.ws_terms.len() {
            return Err(mismatch("weighted-sum coefficients", self.spec.ws_terms.len(), p.betas.len()));
        }
        theta.extend_from_slice(&p.betas);
        if p.ascs.len() != self.spec.n_alternatives {
            return Err(mismatch("ASCs", self.spec.n_alternatives, p.ascs.len()));
        }
        if self.spec.asc {
            theta.extend_from_slice(&p.ascs[1..]);
        }
        if p.error.len() != self.err.n_free() {
            return Err(mismatch("error-structure parameters", self.err.n_free(), p.error.len()));
        }
        theta.extend_from_slice(&p.error);
        if self.segment(SegmentKind::LogScale).is_some() {
            if !(p.scale > 0.0) {
                return Err(Error::InvalidSpec(format!("estimated CI scale must be positive, got {}", p.scale)));
            }
            theta.push(ln(p.scale));
        }
        Ok(theta)
    }

    /// Linear constraints on the packed vector: one equality
    /// (`Σ m = 1`) and `g·2^(g−1)` monotonicity inequalities (`≥ 0`) per
    /// capacity group.
    pub fn constraints(&self) -> Result<(Vec<LinearRow>, Vec<LinearRow>)> {
        let mut eq = Vec::new();
        let mut ineq = Vec::new();
        if self.g() == 0 {
            return Ok((eq, ineq));
        }
        let cs = build_constraints(self.g())?;
        let n = self.n_params();
        let embed = |row: &LinearRow, start: usize| {
            let mut coeffs = vec![0.0; n];
            coeffs[start..start + row.coeffs.len()].copy_from_slice(&row.coeffs);
            LinearRow { coeffs, rhs: row.rhs }
        };
        for group in 0..self.n_capacity_groups() {
            let s = self.segment(SegmentKind::Mobius { group }).expect("mobius segment");
            eq.push(embed(&cs.equality, s.start));
            ineq.extend(cs.inequalities.iter().map(|r| embed(r, s.start)));
        }
        Ok((eq, ineq))
    }

    /// Precomputes capacities and cut-off coefficients for repeated utility
    /// evaluation. The Möbius values need not be feasible.
    pub fn evaluator(&self, theta: &[f64]) -> Result<Evaluator<'_>> {
        let p = self.unpack(theta)?;
        let capacities = p
            .mobius
            .iter()
            .map(|m| mobius_to_capacity(m).values().to_vec())
            .collect();
        Ok(Evaluator {
            model: self,
            capacities,
            params: p,
        })
    }

    /// Systematic utilities of one task at `theta`.
    pub fn systematic_utilities(&self, theta: &[f64], task: &ChoiceTask) -> Result<Vec<f64>> {
        let ev = self.evaluator(theta)?;
        let mut out = vec![0.0; self.spec.n_alternatives];
        ev.utilities(task, &mut out)?;
        Ok(out)
    }

    /// Start point: uniform additive capacities (singletons `1/G`), cut-offs
    /// spanning the 10th–90th percentile of each attribute (intercept only),
    /// zero coefficients and ASCs, IID error parameters and `λ = 1`.
    pub fn feasible_start(&self, data: &ChoiceDataset) -> Result<Vec<f64>> {
        let g = self.g();
        let mobius = (0..self.n_capacity_groups())
            .map(|_| {
                let mut nonempty = vec![0.0; (1 << g) - 1];
                for i in 0..g {
                    nonempty[(1 << i) - 1] = 1.0 / g as f64;
                }
                MobiusVector::from_nonempty(g, &nonempty)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cutoffs = Vec::with_capacity(self.attrs.len());
        for attr in &self.attrs {
            if let CompiledNorm::Cutoff {
                shape,
                covariate_cols,
                vary_first_point,
                groups,
            } = &attr.norm
            {
                let points = start_points(data, attr.column, *shape)?;
                let mut coeffs = Vec::with_capacity(points.len());
                let mut prev = 0.0;
                for (pi, &pt) in points.iter().enumerate() {
                    let mut c = vec![0.0; coeff_count(pi, covariate_cols.len(), *vary_first_point)];
                    c[0] = ln(pt - prev);
                    prev = pt;
                    coeffs.push(c);
                }
                cutoffs.push(vec![coeffs; n_cutoff_groups(groups)]);
            } else {
                cutoffs.push(Vec::new());
            }
        }
        let p = ModelParams {
            mobius,
            cutoffs,
            betas: vec![0.0; self.spec.ws_terms.len()],
            ascs: vec![0.0; self.spec.n_alternatives],
            error: self.err.initial_params(),
            scale: match self.spec.ci_scale {
                CiScale::Fixed(l) => l,
                CiScale::Estimated => 1.0,
            },
        };
        self.pack(&p)
    }

    /// Resolved cut-off points for every estimated-cut-off attribute and
    /// task: `[attribute][task][alternative] -> points`. Attributes without
    /// estimated cut-offs yield empty vectors.
    pub fn resolved_cutoffs(&self, theta: &[f64], data: &ChoiceDataset) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
        let p = self.unpack(theta)?;
        let mut out = Vec::with_capacity(self.attrs.len());
        let mut z = Vec::new();
        for (ai, attr) in self.attrs.iter().enumerate() {
            let mut per_attr = Vec::new();
            if let CompiledNorm::Cutoff {
                covariate_cols,
                vary_first_point,
                groups,
                ..
            } = &attr.norm
            {
                for task in &data.tasks {
                    let mut per_task = Vec::with_capacity(self.spec.n_alternatives);
                    for &grp in groups.iter().take(self.spec.n_alternatives) {
                        let pts = resolve_for(
                            &p.cutoffs[ai][grp],
                            covariate_cols,
                            *vary_first_point,
                            task,
                            self.n_columns,
                            &mut z,
                        )?;
                        per_task.push(pts);
                    }
                    per_attr.push(per_task);
                }
            }
            out.push(per_attr);
        }
        Ok(out)
    }
}

fn start_points(data: &ChoiceDataset, column: usize, shape: MembershipShape) -> Result<Vec<f64>> {
    let qs: &[f64] = match shape {
        MembershipShape::Trapezoidal => &[0.1, 11.0 / 30.0, 19.0 / 30.0, 0.9],
        _ => &[0.1, 0.9],
    };
    let mut pts = Vec::with_capacity(qs.len());
    for &q in qs {
        pts.push(
            data.column_quantile(column, q)
                .ok_or_else(|| Error::InvalidData("no available alternatives to place cut-offs".into()))?,
        );
    }
    let lo = data.column_quantile(column, 0.0).unwrap_or(0.0);
    let hi = data.column_quantile(column, 1.0).unwrap_or(1.0);
    let min_gap = 1e-3 * (hi - lo).abs().max(1.0);
    // the log-link needs a positive first point and positive gaps
    pts[0] = pts[0].max(min_gap);
    for k in 1..pts.len() {
        pts[k] = pts[k].max(pts[k - 1] + min_gap);
    }
    Ok(pts)
}

fn demographics_into(task: &ChoiceTask, n_columns: usize, cols: &[usize], z: &mut Vec<f64>) {
    let alt = task.available.iter().position(|a| *a).unwrap_or(0);
    z.clear();
    z.push(1.0);
    z.extend(cols.iter().map(|&c| task.value(n_columns, alt, c)));
}

fn resolve_for(
    coeffs: &[Vec<f64>],
    covariate_cols: &[usize],
    vary_first: bool,
    task: &ChoiceTask,
    n_columns: usize,
    z: &mut Vec<f64>,
) -> Result<Vec<f64>> {
    demographics_into(task, n_columns, covariate_cols, z);
    let mut out = Vec::with_capacity(coeffs.len());
    let mut acc = 0.0;
    for (p, gamma) in coeffs.iter().enumerate() {
        let zz = if p == 0 && !vary_first { &z[..1] } else { &z[..] };
        let mut one = Vec::with_capacity(1);
        resolve_into(core::slice::from_ref(gamma), zz, &mut one)?;
        acc += one[0];
        out.push(acc);
    }
    Ok(out)
}

/// Parameters prepared for fast utility evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    model: &'a Model,
    capacities: Vec<Vec<f64>>,
    params: ModelParams,
}

impl Evaluator<'_> {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Dense capacity lattice of each group.
    pub fn capacities(&self) -> &[Vec<f64>] {
        &self.capacities
    }

    /// Normalized attribute matrix of a task, row-major `I × G`.
    pub fn normalized(&self, task: &ChoiceTask, out: &mut Vec<f64>) -> Result<()> {
        let m = self.model;
        let n = m.spec.n_alternatives;
        let g = m.g();
        out.clear();
        out.resize(n * g, 0.0);
        let mut raw = Vec::with_capacity(n);
        let mut norm = Vec::with_capacity(n);
        let mut z = Vec::new();
        for (ai, attr) in m.attrs.iter().enumerate() {
            match &attr.norm {
                CompiledNorm::MinMax(dir) => {
                    raw.clear();
                    let avail: Vec<usize> = (0..n).filter(|&j| task.available[j]).collect();
                    raw.extend(avail.iter().map(|&j| task.value(m.n_columns, j, attr.column)));
                    minmax_into(&raw, *dir, &mut norm);
                    for j in 0..n {
                        out[j * g + ai] = 0.5;
                    }
                    for (k, &j) in avail.iter().enumerate() {
                        out[j * g + ai] = norm[k];
                    }
                }
                CompiledNorm::Fixed(f) => {
                    for j in 0..n {
                        out[j * g + ai] = f.value(task.value(m.n_columns, j, attr.column));
                    }
                }
                CompiledNorm::Cutoff {
                    shape,
                    covariate_cols,
                    vary_first_point,
                    groups,
                } => {
                    let n_groups = n_cutoff_groups(groups);
                    let mut resolved: Vec<Option<MembershipFunction>> = vec![None; n_groups];
                    for j in 0..n {
                        let grp = groups[j];
                        if resolved[grp].is_none() {
                            let pts = resolve_for(
                                &self.params.cutoffs[ai][grp],
                                covariate_cols,
                                *vary_first_point,
                                task,
                                m.n_columns,
                                &mut z,
                            )?;
                            resolved[grp] = Some(unchecked_membership(*shape, &pts));
                        }
                        let f = resolved[grp].as_ref().expect("resolved above");
                        out[j * g + ai] = f.value(task.value(m.n_columns, j, attr.column));
                    }
                }
            }
        }
        Ok(())
    }

    /// Systematic utilities of one task into `out` (length `I`).
    pub fn utilities(&self, task: &ChoiceTask, out: &mut [f64]) -> Result<()> {
        let m = self.model;
        let n = m.spec.n_alternatives;
        let nc = m.n_columns;
        if out.len() != n || task.available.len() != n || task.values.len() != n * nc {
            return Err(Error::DimensionMismatch {
                what: "task alternatives",
                expected: n,
                found: task.available.len(),
            });
        }
        for (j, o) in out.iter_mut().enumerate() {
            let mut v = self.params.ascs[j];
            for (t, b) in m.terms.iter().zip(&self.params.betas) {
                if t.applies[j] {
                    v += b * task.value(nc, j, t.column);
                }
            }
            *o = v;
        }
        let g = m.g();
        if g > 0 {
            let mut x = Vec::with_capacity(n * g);
            self.normalized(task, &mut x)?;
            for (j, o) in out.iter_mut().enumerate() {
                let mu = &self.capacities[m.capacity_group[j]];
                *o += self.params.scale * choquet_unchecked(&x[j * g..(j + 1) * g], mu);
            }
        }
        Ok(())
    }
}

/// Membership function from resolved points without order validation; the
/// cumulative link keeps them ordered, and evaluation tolerates equal points.
fn unchecked_membership(shape: MembershipShape, p: &[f64]) -> MembershipFunction {
    match shape {
        MembershipShape::HalfTriangularIncreasing => MembershipFunction::HalfTriangularIncreasing { a: p[0], b: p[1] },
        MembershipShape::HalfTriangularDecreasing => MembershipFunction::HalfTriangularDecreasing { a: p[0], b: p[1] },
        MembershipShape::Trapezoidal => MembershipFunction::Trapezoidal {
            a: p[0],
            b: p[1],
            c: p[2],
            d: p[3],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::Capacity;
    use alloc::string::ToString;

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn ci_spec(norm: Normalization) -> UtilitySpec {
        UtilitySpec {
            n_alternatives: 3,
            asc: true,
            ws_terms: vec![],
            ci_attributes: (1..=3)
                .map(|i| CiAttribute {
                    name: format!("x{i}"),
                    column: format!("x{i}"),
                    normalization: norm.clone(),
                })
                .collect(),
            capacity_mode: CapacityMode::Generic,
            ci_scale: CiScale::Fixed(1.0),
        }
    }

    #[test]
    fn layout_and_round_trip() {
        let spec = UtilitySpec {
            n_alternatives: 3,
            asc: true,
            ws_terms: vec![WsTerm {
                name: "b_cost".into(),
                column: "cost".into(),
                alternatives: None,
            }],
            ci_attributes: vec![
                CiAttribute {
                    name: "t".into(),
                    column: "t".into(),
                    normalization: Normalization::Cutoff {
                        shape: MembershipShape::HalfTriangularDecreasing,
                        covariates: vec!["age".into()],
                        vary_first_point: false,
                        groups: Some(vec![0, 1, 1]),
                    },
                },
                CiAttribute {
                    name: "c".into(),
                    column: "cost".into(),
                    normalization: Normalization::MinMax {
                        direction: Direction::Negative,
                    },
                },
            ],
            capacity_mode: CapacityMode::AlternativeSpecific(vec![0, 0, 1]),
            ci_scale: CiScale::Estimated,
        };
        let err = ErrorStructure::iid(3).unwrap();
        let m = Model::compile(&spec, err, &cols(&["t", "cost", "age"])).unwrap();
        // 2 groups × 3 Möbius + 2 groups × (1 + 2) cut-off + 1 beta + 2 ASC + 1 scale
        assert_eq!(m.n_params(), 6 + 6 + 1 + 2 + 1);
        assert_eq!(m.n_free_params(), 14);
        assert_eq!(m.names()[0], "m[g1][1]");
        assert_eq!(m.names()[6], "cut[t][g1].a.const");
        assert_eq!(m.names()[8], "cut[t][g1].b.age");
        let theta: Vec<f64> = (0..m.n_params()).map(|k| 0.1 * k as f64 - 0.3).collect();
        let p = m.unpack(&theta).unwrap();
        assert_eq!(p.ascs[0], 0.0);
        let back = m.pack(&p).unwrap();
        for (a, b) in back.iter().zip(&theta) {
            assert!((a - b).abs() < 1e-14);
        }
        let (eq, ineq) = m.constraints().unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(ineq.len(), 2 * 4);
    }

    #[test]
    fn unknown_column() {
        let spec = ci_spec(Normalization::MinMax {
            direction: Direction::Positive,
        });
        let err = ErrorStructure::iid(3).unwrap();
        assert_eq!(
            Model::compile(&spec, err, &cols(&["x1", "x2"])).unwrap_err(),
            Error::UnknownColumn("x3".into())
        );
    }

    #[test]
    fn pure_ci_reduces_to_choquet() {
        let spec = ci_spec(Normalization::Fixed {
            shape: MembershipShape::HalfTriangularIncreasing,
            points: vec![0.0, 1.0],
        });
        let err = ErrorStructure::iid(3).unwrap();
        let m = Model::compile(&spec, err, &cols(&["x1", "x2", "x3"])).unwrap();
        let mu = Capacity::from_labeled(
            3,
            &[
                ("1", 0.2),
                ("2", 0.3),
                ("3", 0.1),
                ("1,2", 0.687),
                ("1,3", 0.362),
                ("2,3", 0.493),
                ("1,2,3", 1.0),
            ],
        )
        .unwrap();
        let mut theta = mu.to_mobius().nonempty().to_vec();
        theta.extend([0.0, 0.0]);
        let task = ChoiceTask {
            individual: 1,
            task: 1,
            available: vec![true; 3],
            values: vec![0.3, 0.1, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            chosen: 0,
        };
        let v = m.systematic_utilities(&theta, &task).unwrap();
        assert!((v[0] - 0.2424).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
        assert!((v[2] - 1.0).abs() < 1e-12);
    }
}
