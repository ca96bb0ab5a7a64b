//! In-memory choice panels.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One choice situation: `n_alternatives` rows of `column_names.len()`
/// numeric columns, stored row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChoiceTask {
    pub individual: u64,
    pub task: u64,
    pub available: Vec<bool>,
    pub values: Vec<f64>,
    /// 0-based index of the chosen alternative.
    pub chosen: usize,
}

impl ChoiceTask {
    #[inline]
    pub fn value(&self, n_columns: usize, alternative: usize, column: usize) -> f64 {
        self.values[alternative * n_columns + column]
    }

    pub fn all_available(&self) -> bool {
        self.available.iter().all(|a| *a)
    }
}

/// A panel of choice tasks sharing one column schema. Attribute and
/// demographic columns live side by side; demographic columns are expected
/// to be constant across the alternatives of a task.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChoiceDataset {
    pub column_names: Vec<String>,
    pub n_alternatives: usize,
    pub tasks: Vec<ChoiceTask>,
}

impl ChoiceDataset {
    pub fn new(column_names: Vec<String>, n_alternatives: usize, tasks: Vec<ChoiceTask>) -> Result<Self> {
        let ds = Self {
            column_names,
            n_alternatives,
            tasks,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n_columns(&self) -> usize {
        self.column_names.len()
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.into()))
    }

    /// Checks shapes, the chosen-alternative rules, finiteness and id
    /// uniqueness. Errors name the offending task.
    pub fn validate(&self) -> Result<()> {
        if self.n_alternatives < 2 {
            return Err(Error::InvalidData(format!(
                "at least two alternatives required, got {}",
                self.n_alternatives
            )));
        }
        for (i, name) in self.column_names.iter().enumerate() {
            if self.column_names[..i].contains(name) {
                return Err(Error::InvalidData(format!("duplicate column `{name}`")));
            }
        }
        let c = self.n_columns();
        let mut seen: Vec<(u64, u64)> = Vec::with_capacity(self.tasks.len());
        for t in &self.tasks {
            let loc = || format!("individual {} task {}", t.individual, t.task);
            if t.available.len() != self.n_alternatives || t.values.len() != self.n_alternatives * c {
                return Err(Error::InvalidData(format!("{}: wrong number of alternatives or columns", loc())));
            }
            if t.chosen >= self.n_alternatives {
                return Err(Error::InvalidData(format!("{}: chosen alternative out of range", loc())));
            }
            if !t.available[t.chosen] {
                return Err(Error::InvalidData(format!("{}: chosen alternative is unavailable", loc())));
            }
            if t.available.iter().filter(|a| **a).count() < 2 {
                return Err(Error::InvalidData(format!("{}: fewer than two available alternatives", loc())));
            }
            for (k, v) in t.values.iter().enumerate() {
                let alt = k / c;
                if t.available[alt] && !v.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "{}: non-finite value in column `{}` of alternative {}",
                        loc(),
                        self.column_names[k % c],
                        alt + 1
                    )));
                }
            }
            seen.push((t.individual, t.task));
        }
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidData(format!(
                "duplicate task: individual {} task {}",
                w[0].0, w[0].1
            )));
        }
        Ok(())
    }

    /// Empirical quantile (linear interpolation) of a column over available
    /// alternatives of all tasks.
    pub fn column_quantile(&self, column: usize, q: f64) -> Option<f64> {
        let c = self.n_columns();
        let mut v: Vec<f64> = self
            .tasks
            .iter()
            .flat_map(|t| {
                (0..self.n_alternatives)
                    .filter(|&a| t.available[a])
                    .map(move |a| t.values[a * c + column])
            })
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(quantile_sorted(&v, q))
    }

    /// Share of tasks choosing each alternative.
    pub fn choice_shares(&self) -> Vec<f64> {
        let mut counts = alloc::vec![0usize; self.n_alternatives];
        for t in &self.tasks {
            counts[t.chosen] += 1;
        }
        let n = self.tasks.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

/// Linear-interpolation quantile of an ascending slice (`q` in `[0, 1]`).
pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let n = v.len();
    if n == 1 {
        return v[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    v[lo] + frac * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn task(ind: u64, chosen: usize) -> ChoiceTask {
        ChoiceTask {
            individual: ind,
            task: 1,
            available: vec![true; 3],
            values: vec![1.0, 2.0, 3.0],
            chosen,
        }
    }

    #[test]
    fn validates() {
        let cols = vec!["x".to_string()];
        assert!(ChoiceDataset::new(cols.clone(), 3, vec![task(1, 0), task(2, 2)]).is_ok());
        assert!(ChoiceDataset::new(cols.clone(), 3, vec![task(1, 0), task(1, 2)]).is_err());
        assert!(ChoiceDataset::new(cols.clone(), 3, vec![task(1, 3)]).is_err());
        let mut t = task(1, 0);
        t.available[0] = false;
        assert!(ChoiceDataset::new(cols, 3, vec![t]).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.1), 1.4);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
    }
}
