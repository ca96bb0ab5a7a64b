//! Multinomial probit choice models whose systematic utility is a Choquet
//! integral over fuzzy-membership-normalized attributes.
//!
//! The crate is `no_std` (with `alloc`). Enable the `std` feature for
//! `std::error::Error` integration and `parallel` to evaluate likelihood terms
//! on a rayon pool. All numerical paths are deterministic: the same inputs
//! always produce bitwise-identical outputs, with or without `parallel`.
//!
//! Module map:
//!
//! - [`fuzzy`]: capacities, Möbius representation, monotonicity constraints,
//!   Shapley values and interaction indices.
//! - [`membership`]: min-max normalization, fuzzy membership functions and
//!   demographic cut-off parameterizations.
//! - [`choquet`]: the Choquet integral.
//! - [`utility`]: utility specifications, parameter packing and systematic
//!   utilities.
//! - [`mnp`]: utility differencing, covariance parameterizations, Halton
//!   draws and the GHK simulator.
//! - [`estimator`]: simulated maximum likelihood under linear constraints.
//! - [`simulation`]: data-generating processes and recovery metrics.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod choquet;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod fuzzy;
pub mod linalg;
pub mod math;
pub mod membership;
pub mod mnp;
pub mod simulation;
pub mod utility;

pub use error::{Error, Result};
