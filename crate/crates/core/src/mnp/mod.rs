//! Multinomial probit kernel: utility differencing, error covariance
//! parameterizations, Halton draws and the GHK simulator.

mod covariance;
mod differencing;
mod ghk;
mod halton;

pub use covariance::{iid_matrix, reparam_cholesky_rownorm, CovParameterization, ErrorKind, ErrorStructure};
pub use differencing::differencing_matrix;
pub use ghk::{
    choice_probabilities, choice_probability, ghk_with_factor, mvncdf_ghk, ProbitKernel, PROBABILITY_FLOOR,
};
pub use halton::{halton_draws, radical_inverse, DrawAssignment, DrawBlock, HaltonPlan, MAX_HALTON_DIM};
