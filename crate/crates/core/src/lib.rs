//! Autocorrelation-corrected tests of linear dependence between time series.
//!
//! Sample correlations between autocorrelated series are far more variable
//! than the classical sampling theory assumes. This crate estimates an
//! effective sample size from the residual autocorrelations and feeds it
//! into modified t, F and Wilks-type (Λ*) tests for partial correlation,
//! Gaussian mutual information and Granger causality. A simulation harness
//! measures false-positive rates of the modified and classical tests.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ess;
pub mod harness;
pub mod linalg;
pub mod linreg;
pub mod measures;
pub mod nulldist;
pub mod series;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use series::{AcfEstimate, LagWindow, Partition, TaperSpec, TimeSeriesMatrix, Truncation};

#[cfg(test)]
mod testutil;
