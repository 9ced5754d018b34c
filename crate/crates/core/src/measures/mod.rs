//! Dependence measures and their tests.
//!
//! Every multivariate measure is evaluated as a chain of partial
//! correlations. Each term carries its own effective degrees of freedom,
//! which parameterize the Λ* null; the classical χ² and F tests are computed
//! alongside for comparison.

mod ais;
mod classical;
mod corr;
mod gc;
mod mi;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ess::{effective_dof, effective_sample_size};
use crate::linreg::ChainStep;
use crate::nulldist::{lambda_star_pvalue, NullFamily, TestVerdict, DEFAULT_NULL_SAMPLES};
use crate::series::TaperSpec;

pub use ais::{active_information_storage, ais_embedding_select, ais_increments};
pub use classical::{classical_test, MeasureKind, TestDims};
pub use corr::{partial_corr_test_modified, pearson_test_modified, Tails};
pub use gc::granger_causality;
pub use mi::mi_gaussian;

/// Settings shared by all measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOptions {
    #[serde(default)]
    pub taper: TaperSpec,
    /// Monte-Carlo sample count for Λ* nulls.
    #[serde(default = "default_null_samples")]
    pub null_samples: usize,
    /// Seed of the Λ* Monte-Carlo stream.
    #[serde(default)]
    pub seed: u64,
    /// Null families to evaluate; families that do not apply to a measure
    /// are skipped.
    #[serde(default = "default_tests")]
    pub tests: Vec<NullFamily>,
}

fn default_null_samples() -> usize {
    DEFAULT_NULL_SAMPLES
}

fn default_tests() -> Vec<NullFamily> {
    NullFamily::ALL.to_vec()
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self { taper: TaperSpec::default(), null_samples: DEFAULT_NULL_SAMPLES, seed: 0, tests: default_tests() }
    }
}

impl MeasureOptions {
    pub fn wants(&self, family: NullFamily) -> bool {
        self.tests.contains(&family)
    }
}

/// One partial-correlation term of a chain decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTerm {
    /// 1-based `(g, h)` for MI, `(g, h, j)` for Granger causality.
    pub indices: Vec<usize>,
    pub partial_corr: f64,
    pub conditioning_dim: usize,
    /// Effective sample size of the term's residual pair, if computed.
    pub eta: Option<f64>,
    /// `eta - conditioning_dim - 2`, if computed.
    pub effective_dof: Option<f64>,
    #[serde(default)]
    pub clamped: bool,
}

impl ChainTerm {
    fn label(&self) -> String {
        let idx: Vec<String> = self.indices.iter().map(usize::to_string).collect();
        format!("({})", idx.join(","))
    }
}

/// Value of a measure, its chain terms and one verdict per null family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceResult {
    /// Measure value: correlation for the correlation tests, nats for MI,
    /// the log variance ratio for Granger causality.
    pub value: f64,
    /// The same quantity computed directly from generalized variances.
    pub direct_value: Option<f64>,
    pub terms: Vec<ChainTerm>,
    pub verdicts: BTreeMap<NullFamily, TestVerdict>,
    /// Observations entering each regression.
    pub n_obs: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DependenceResult {
    pub fn p_value(&self, family: NullFamily) -> Option<f64> {
        self.verdicts.get(&family).map(|v| v.p_value)
    }

    /// Per-term effective dofs (terms without one are skipped).
    pub fn dof_vector(&self) -> Vec<f64> {
        self.terms.iter().filter_map(|t| t.effective_dof).collect()
    }

    /// `sum_i -1/2 log(1 - r_i^2)` over the chain terms.
    pub fn chain_information(&self) -> f64 {
        chain_information(&self.terms)
    }
}

pub(crate) fn chain_information(terms: &[ChainTerm]) -> f64 {
    terms.iter().map(|t| -0.5 * (-t.partial_corr * t.partial_corr).ln_1p()).sum()
}

/// Converts chain steps into terms, computing effective dofs when `with_dof`.
pub(crate) fn build_terms<F>(
    steps: &[ChainStep],
    index_of: F,
    taper: &TaperSpec,
    with_dof: bool,
) -> Result<Vec<ChainTerm>>
where
    F: Fn(usize) -> Vec<usize>,
{
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (eta, dof, clamped) = if with_dof {
                let ess = effective_sample_size(&s.target_residual, &s.predictor_residual, taper)?;
                (Some(ess.eta), Some(effective_dof(ess.eta, s.conditioning_dim)), ess.clamped)
            } else {
                (None, None, false)
            };
            Ok(ChainTerm {
                indices: index_of(i),
                partial_corr: s.corr,
                conditioning_dim: s.conditioning_dim,
                eta,
                effective_dof: dof,
                clamped,
            })
        })
        .collect()
}

/// Errors with the offending terms if any effective dof is not positive.
pub(crate) fn check_term_dofs(terms: &[ChainTerm]) -> Result<Vec<f64>> {
    let bad: Vec<&ChainTerm> = terms.iter().filter(|t| !t.effective_dof.is_some_and(|n| n > 0.0)).collect();
    if !bad.is_empty() {
        return Err(Error::InsufficientEffectiveSamples {
            terms: bad.iter().map(|t| t.label()).collect(),
            dof: bad.iter().map(|t| t.effective_dof.unwrap_or(f64::NAN)).collect(),
        });
    }
    Ok(terms.iter().filter_map(|t| t.effective_dof).collect())
}

pub(crate) fn clamp_warnings(terms: &[ChainTerm]) -> Vec<String> {
    terms
        .iter()
        .filter(|t| t.clamped)
        .map(|t| format!("effective sample size floored for term {}", t.label()))
        .collect()
}

/// Λ* verdict for the statistic `prod (1 - r_i^2)`.
pub(crate) fn lambda_star_verdict(terms: &[ChainTerm], opts: &MeasureOptions) -> Result<TestVerdict> {
    let dof = check_term_dofs(terms)?;
    let stat: f64 = terms.iter().map(|t| 1.0 - t.partial_corr * t.partial_corr).product();
    let p = lambda_star_pvalue(&dof, stat, opts.null_samples, opts.seed)?;
    Ok(TestVerdict::new(NullFamily::LambdaStar, stat, p, dof))
}

#[cfg(test)]
mod tests;
