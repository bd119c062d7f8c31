//! Command-line front end for bivariate copula regression boosting:
//! configuration parsing, CSV ingestion, model persistence and the
//! simulate / fit / tune / predict / score / report pipeline.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod modelfile;
