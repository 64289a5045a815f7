//! Disaggregation of coarse gridded soil moisture to fine resolution.
//!
//! Fine-scale covariates (LST, 3-day precipitation, LAI, land cover and
//! pixel coordinates) are clustered with a regularized Cauchy–Schwarz
//! criterion; one kernel ridge regression model is trained per cluster on
//! in-situ soil moisture and the models are blended with the soft
//! memberships. A PRI baseline, a synthetic season generator and the
//! evaluation metrics live alongside.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod error;
pub mod dataset;
pub mod grid;
pub mod itclust;
pub mod kridge;
pub mod metrics;
mod par;
pub mod pri;
pub mod season;
pub mod seed;
pub mod srrm;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{Grid, VariableTag};
