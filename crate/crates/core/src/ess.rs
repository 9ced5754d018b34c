//! Bartlett's first-order variance of a sample correlation and the effective
//! sample size derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{autocorrelation_for, demean_row, AcfEstimate, TaperSpec};

/// Floor applied to the Bartlett variance, in units of `1/T`.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Effective number of independent samples behind one sample correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssEstimate {
    /// Approximate variance of the sample correlation.
    pub variance: f64,
    /// `1 + 1/variance`.
    pub eta: f64,
    pub taper: TaperSpec,
    pub series_length: usize,
    /// The raw Bartlett sum was non-positive and the variance was floored.
    pub clamped: bool,
}

fn bartlett_raw(acf_a: &AcfEstimate, acf_b: &AcfEstimate, t: usize) -> Result<f64> {
    if acf_a.series_length != t || acf_b.series_length != t {
        return Err(Error::InvalidInput(format!(
            "autocorrelations computed on lengths {} and {}, expected {t}",
            acf_a.series_length, acf_b.series_length
        )));
    }
    if acf_a.truncation != acf_b.truncation || acf_a.window != acf_b.window {
        return Err(Error::InvalidInput("autocorrelations use different lag windows".into()));
    }
    let tf = t as f64;
    let mut s = 0.0;
    for u in 1..=acf_a.truncation {
        s += (tf - u as f64) / tf * acf_a.weight(u) * acf_a.values[u] * acf_b.values[u];
    }
    Ok((1.0 + 2.0 * s) / tf)
}

/// Bartlett variance `T^-1 (1 + 2 sum_u (T-u)/T lambda(u) r_a(u) r_b(u))`,
/// floored at `1e-6 / T` when the sum is not positive.
pub fn bartlett_variance(acf_a: &AcfEstimate, acf_b: &AcfEstimate, t: usize) -> Result<f64> {
    let raw = bartlett_raw(acf_a, acf_b, t)?;
    Ok(if raw > 0.0 { raw } else { VARIANCE_FLOOR / t as f64 })
}

/// Effective sample size of the correlation between two (residual) rows.
pub fn effective_sample_size(a: &[f64], b: &[f64], taper: &TaperSpec) -> Result<EssEstimate> {
    let t = a.len();
    if b.len() != t {
        return Err(Error::InvalidInput("rows have different lengths".into()));
    }
    if t < 3 {
        return Err(Error::InvalidInput("effective sample size needs at least 3 samples".into()));
    }
    let acf_a = autocorrelation_for(&demean_row(a), taper)?;
    let acf_b = autocorrelation_for(&demean_row(b), taper)?;
    let raw = bartlett_raw(&acf_a, &acf_b, t)?;
    let clamped = !(raw > 0.0);
    let variance = if clamped { VARIANCE_FLOOR / t as f64 } else { raw };
    Ok(EssEstimate { variance, eta: 1.0 + 1.0 / variance, taper: *taper, series_length: t, clamped })
}

/// Effective degrees of freedom `eta - c - 2`. May be negative; consumers
/// reject non-positive values.
pub fn effective_dof(eta: f64, conditioning_dim: usize) -> f64 {
    eta - conditioning_dim as f64 - 2.0
}
