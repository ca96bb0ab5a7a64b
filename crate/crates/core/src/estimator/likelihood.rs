use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::ChoiceDataset;
use crate::error::{Error, Result};
use crate::math::ln;
use crate::mnp::{DrawAssignment, DrawBlock, HaltonPlan, ProbitKernel, PROBABILITY_FLOOR};
use crate::utility::{Evaluator, Model};

/// Simulated log-likelihood of a dataset under a compiled model with a fixed
/// set of Halton draws (common random numbers across evaluations).
#[derive(Debug, Clone)]
pub struct Likelihood<'a> {
    model: &'a Model,
    data: &'a ChoiceDataset,
    draws: Vec<DrawBlock>,
}

impl<'a> Likelihood<'a> {
    pub fn new(model: &'a Model, data: &'a ChoiceDataset, plan: &HaltonPlan) -> Result<Self> {
        let n = model.spec().n_alternatives;
        if data.n_alternatives != n {
            return Err(Error::InvalidData(alloc::format!(
                "dataset has {} alternatives, model expects {n}",
                data.n_alternatives
            )));
        }
        if plan.n_draws == 0 {
            return Err(Error::InvalidSpec("at least one Halton draw is required".into()));
        }
        let dim = n.saturating_sub(2);
        let draws = match plan.assignment {
            DrawAssignment::Common => vec![plan.block(dim, 0)?],
            DrawAssignment::Consecutive => (0..data.len())
                .map(|i| plan.block(dim, i))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self { model, data, draws })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn data(&self) -> &ChoiceDataset {
        self.data
    }

    pub fn n_obs(&self) -> usize {
        self.data.len()
    }

    pub fn draws_for(&self, obs: usize) -> &DrawBlock {
        if self.draws.len() == 1 {
            &self.draws[0]
        } else {
            &self.draws[obs]
        }
    }

    /// Kernel and evaluator at `theta`.
    pub fn prepare(&self, theta: &[f64]) -> Result<(Evaluator<'a>, ProbitKernel)> {
        let ev = self.model.evaluator(theta)?;
        let kernel = ProbitKernel::from_params(self.model.error_structure(), &ev.params().error)?;
        Ok((ev, kernel))
    }

    fn term(&self, ev: &Evaluator<'_>, kernel: &ProbitKernel, obs: usize, v: &mut [f64]) -> Result<f64> {
        let task = &self.data.tasks[obs];
        ev.utilities(task, v)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("systematic utilities"));
        }
        let avail = if task.all_available() {
            None
        } else {
            Some(&task.available[..])
        };
        let p = kernel.probability(v, task.chosen, avail, self.draws_for(obs))?;
        Ok(ln(p.max(PROBABILITY_FLOOR)))
    }

    /// Log-probability of the observed choice for every task.
    pub fn per_observation(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let (ev, kernel) = self.prepare(theta)?;
        let n_alt = self.model.spec().n_alternatives;
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..self.data.len())
                .into_par_iter()
                .map_init(|| vec![0.0; n_alt], |v, i| self.term(&ev, &kernel, i, v))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut v = vec![0.0; n_alt];
            (0..self.data.len())
                .map(|i| self.term(&ev, &kernel, i, &mut v))
                .collect()
        }
    }

    /// Total simulated log-likelihood, summed in observation order.
    pub fn loglik(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.per_observation(theta)?.iter().sum())
    }
}
