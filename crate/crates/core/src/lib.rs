//! Bivariate distributional copula regression estimated by non-cyclic
//! component-wise gradient boosting.
//!
//! A bivariate response (binary/binary, count/count or binary/continuous) is
//! modelled by joining two parametric margins with a one-parameter copula.
//! Every distribution parameter — marginal and copula — is related to
//! covariates through an additive predictor on its link scale, and all
//! predictors are estimated jointly by greedy component-wise boosting with
//! early stopping on an out-of-bag partition.

pub mod baselearners;
pub mod boosting;
pub mod copulas;
pub mod data;
pub mod error;
pub mod likelihood;
pub mod link;
pub mod margins;
pub mod normal;
pub mod numeric;
pub mod scoring;
pub mod simulate;

pub use error::{Error, Result};
