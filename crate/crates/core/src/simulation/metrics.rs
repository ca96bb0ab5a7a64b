use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{quantile_sorted, ChoiceDataset};
use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::mnp::{choice_probabilities, HaltonPlan};
use crate::utility::Model;

/// Two-sided 5% critical value.
pub const T_CRITICAL: f64 = 1.96;

/// Quantiles reported for marginal-effect distributions.
pub const ME_QUANTILES: [f64; 12] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0];

fn check_rows(truth: &[f64], estimates: &[Vec<f64>]) -> Result<()> {
    for e in estimates {
        if e.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                what: "estimate row",
                expected: truth.len(),
                found: e.len(),
            });
        }
    }
    Ok(())
}

/// Mean absolute error over replications and parameters, divided by the
/// population standard deviation of the true values.
pub fn sdmae(truth: &[f64], estimates: &[Vec<f64>]) -> Result<f64> {
    check_rows(truth, estimates)?;
    let k = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / k;
    let sd = sqrt(truth.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / k);
    if truth.len() < 2 || !(sd > 0.0) {
        return Err(Error::ZeroSpread);
    }
    if estimates.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = estimates
        .iter()
        .flat_map(|e| e.iter().zip(truth).map(|(a, b)| (a - b).abs()))
        .sum();
    Ok(total / (k * estimates.len() as f64) / sd)
}

/// Absolute percentage bias `100·|est − true|/|true|`, averaged over
/// replications and over parameters with nonzero true value. `None` when
/// every true value is zero or there are no replications.
pub fn apb(truth: &[f64], estimates: &[Vec<f64>]) -> Result<Option<f64>> {
    check_rows(truth, estimates)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for e in estimates {
        for (est, &t) in e.iter().zip(truth) {
            if t != 0.0 {
                total += 100.0 * (est - t).abs() / t.abs();
                count += 1;
            }
        }
    }
    Ok((count > 0).then(|| total / count as f64))
}

/// Share of replications whose 95% interval `est ± 1.96·se` contains
/// `truth`.
pub fn coverage_probability(truth: f64, estimates: &[f64], std_errors: &[f64]) -> Result<f64> {
    if estimates.len() != std_errors.len() {
        return Err(Error::DimensionMismatch {
            what: "standard errors",
            expected: estimates.len(),
            found: std_errors.len(),
        });
    }
    if estimates.is_empty() {
        return Ok(0.0);
    }
    let hits = estimates
        .iter()
        .zip(std_errors)
        .filter(|(e, s)| **e - T_CRITICAL * **s <= truth && truth <= **e + T_CRITICAL * **s)
        .count();
    Ok(hits as f64 / estimates.len() as f64)
}

/// Coverage pooled over every (replication, parameter) pair with an
/// available standard error. `None` when none is available.
pub fn pooled_coverage(truth: &[f64], estimates: &[Vec<f64>], std_errors: &[Vec<Option<f64>>]) -> Result<Option<f64>> {
    check_rows(truth, estimates)?;
    let mut hits = 0usize;
    let mut count = 0usize;
    for (e, s) in estimates.iter().zip(std_errors) {
        for ((est, se), &t) in e.iter().zip(s).zip(truth) {
            if let Some(se) = se {
                count += 1;
                if est - T_CRITICAL * se <= t && t <= est + T_CRITICAL * se {
                    hits += 1;
                }
            }
        }
    }
    Ok((count > 0).then(|| hits as f64 / count as f64))
}

/// `|m_true − m_est| / sqrt(sd_true² + sd_est²)`.
pub fn marginal_effect_ttest(true_mean: f64, true_sd: f64, est_mean: f64, est_sd: f64) -> f64 {
    let denom = sqrt(true_sd * true_sd + est_sd * est_sd);
    let diff = (true_mean - est_mean).abs();
    if denom > 0.0 {
        diff / denom
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Per-observation probability changes after scaling one attribute.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginalEffects {
    pub column: String,
    pub pct_change: f64,
    pub changed_alternatives: Vec<usize>,
    /// `changes[alternative][observation]`.
    pub changes: Vec<Vec<f64>>,
}

impl MarginalEffects {
    pub fn mean(&self, alternative: usize) -> f64 {
        let c = &self.changes[alternative];
        if c.is_empty() {
            return 0.0;
        }
        c.iter().sum::<f64>() / c.len() as f64
    }

    /// Sample standard deviation (`n − 1`).
    pub fn sd(&self, alternative: usize) -> f64 {
        let c = &self.changes[alternative];
        if c.len() < 2 {
            return 0.0;
        }
        let m = self.mean(alternative);
        sqrt(c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (c.len() - 1) as f64)
    }

    /// `[alternative][quantile]` over [`ME_QUANTILES`].
    pub fn quantile_table(&self) -> Vec<Vec<f64>> {
        self.changes
            .iter()
            .map(|c| {
                let mut s = c.clone();
                s.sort_by(f64::total_cmp);
                ME_QUANTILES
                    .iter()
                    .map(|&q| if s.is_empty() { 0.0 } else { quantile_sorted(&s, q) })
                    .collect()
            })
            .collect()
    }
}

fn resolve_column(model: &Model, data: &ChoiceDataset, attribute: &str) -> Result<usize> {
    let spec = model.spec();
    let column = spec
        .ci_attributes
        .iter()
        .find(|a| a.name == attribute)
        .map(|a| a.column.as_str())
        .or_else(|| spec.ws_terms.iter().find(|t| t.name == attribute).map(|t| t.column.as_str()))
        .unwrap_or(attribute);
    data.column_index(column)
}

/// Changes in every alternative's choice probability when `attribute` (a
/// CI attribute name, a weighted-sum term name or a column) is scaled by
/// `1 + pct_change` for the `changed` alternatives.
pub fn marginal_effects(
    model: &Model,
    theta: &[f64],
    data: &ChoiceDataset,
    attribute: &str,
    pct_change: f64,
    changed: &[usize],
    plan: &HaltonPlan,
) -> Result<MarginalEffects> {
    let col = resolve_column(model, data, attribute)?;
    let n = data.n_alternatives;
    if let Some(&bad) = changed.iter().find(|&&a| a >= n) {
        return Err(Error::IndexOutOfRange {
            what: "changed alternative",
            index: bad,
            len: n,
        });
    }
    if !pct_change.is_finite() {
        return Err(Error::NonFinite("percentage change"));
    }
    let ev = model.evaluator(theta)?;
    let kernel = crate::mnp::ProbitKernel::from_params(model.error_structure(), &ev.params().error)?;
    let draws = plan.block(n.saturating_sub(2), 0)?;
    let nc = data.n_columns();
    let mut changes = vec![Vec::with_capacity(data.len()); n];
    let mut v = vec![0.0; n];
    for task in &data.tasks {
        let avail = (!task.all_available()).then_some(&task.available[..]);
        ev.utilities(task, &mut v)?;
        let before = choice_probabilities(&kernel, &v, avail, &draws)?;
        if pct_change == 0.0 {
            for c in changes.iter_mut() {
                c.push(0.0);
            }
            continue;
        }
        let mut modified = task.clone();
        for &a in changed {
            modified.values[a * nc + col] *= 1.0 + pct_change;
        }
        ev.utilities(&modified, &mut v)?;
        let after = choice_probabilities(&kernel, &v, avail, &draws)?;
        for (j, c) in changes.iter_mut().enumerate() {
            c.push(if task.available[j] { after[j] - before[j] } else { 0.0 });
        }
    }
    Ok(MarginalEffects {
        column: data.column_names[col].clone(),
        pct_change,
        changed_alternatives: changed.to_vec(),
        changes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sdmae_fixtures() {
        assert_eq!(sdmae(&[0.0, 1.0], &[vec![0.0, 1.0]]).unwrap(), 0.0);
        let v = sdmae(&[0.0, 1.0], &[vec![0.5, 0.5]]).unwrap();
        // MAE 0.5 over population sd 0.5
        assert!((v - 1.0).abs() < 1e-12);
        let t = [0.3, 0.25, 0.2, 0.1];
        let e: Vec<f64> = t.iter().map(|x| x + 0.01).collect();
        let mean = 0.2125;
        let sd = (t.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0).sqrt();
        assert!((sdmae(&t, &[e]).unwrap() - 0.01 / sd).abs() < 1e-12);
        assert_eq!(sdmae(&[0.2, 0.2], &[vec![0.1, 0.1]]), Err(Error::ZeroSpread));
    }

    #[test]
    fn apb_skips_zero_truth() {
        let a = apb(&[0.5, 0.0], &[vec![0.55, 0.3]]).unwrap().unwrap();
        assert!((a - 10.0).abs() < 1e-9);
        assert_eq!(apb(&[0.0], &[vec![1.0]]).unwrap(), None);
    }

    #[test]
    fn coverage_fixtures() {
        assert_eq!(coverage_probability(1.0, &[1.0, 1.0], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(coverage_probability(0.0, &[1.0, 0.1], &[0.1, 0.1]).unwrap(), 0.5);
        let p = pooled_coverage(&[0.0, 0.0], &[vec![0.1, 5.0]], &[vec![Some(0.1), None]])
            .unwrap()
            .unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn ttest_fixtures() {
        assert_eq!(marginal_effect_ttest(0.1, 0.05, 0.1, 0.07), 0.0);
        assert!((marginal_effect_ttest(0.1, 0.05, 0.2, 0.05) - 1.414).abs() < 1e-3);
        assert!((marginal_effect_ttest(0.0, 0.05, 0.3, 0.05) - 4.243).abs() < 1e-3);
    }
}
