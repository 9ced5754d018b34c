//! Classical χ² and F nulls for MI and Granger causality. They assume
//! serially independent residuals and serve as the comparison baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nulldist::{NullFamily, TestVerdict};
use crate::special::{chi2_sf, f_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    MutualInformation,
    GrangerCausality,
}

/// Dimension bookkeeping for the classical tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TestDims {
    /// Observations per regression.
    pub n_obs: usize,
    pub k: usize,
    pub l: usize,
    pub c: usize,
    /// Own-history length (Granger causality only).
    #[serde(default)]
    pub p: usize,
    /// Source-history length (Granger causality only).
    #[serde(default)]
    pub q: usize,
}

/// Classical test of a measure value.
///
/// * MI, χ²: `2 T I ~ χ²(k l)`.
/// * MI, F (one side univariate): `((T - (l+c+1)) / l)(e^{2I} - 1) ~ F(l, T - (l+c+1))`,
///   with the roles of k and l swapped when `l = 1`.
/// * GC, χ²: `T F ~ χ²(k l q)`.
/// * GC, F (`k = 1`): `((T - (p+lq+c+1)) / lq)(e^F - 1) ~ F(lq, T - (p+lq+c+1))`.
pub fn classical_test(kind: MeasureKind, family: NullFamily, value: f64, dims: &TestDims) -> Result<TestVerdict> {
    if dims.k == 0 || dims.l == 0 || dims.n_obs == 0 {
        return Err(Error::InvalidInput(format!("invalid test dimensions {dims:?}")));
    }
    if kind == MeasureKind::GrangerCausality && (dims.p == 0 || dims.q == 0) {
        return Err(Error::InvalidInput("Granger causality needs p >= 1 and q >= 1".into()));
    }
    let t = dims.n_obs as f64;
    let value = value.max(0.0);
    match (kind, family) {
        (MeasureKind::MutualInformation, NullFamily::ChiSquare) => {
            let stat = 2.0 * t * value;
            let df = (dims.k * dims.l) as f64;
            Ok(TestVerdict::new(family, stat, chi2_sf(stat, df)?, vec![df]))
        }
        (MeasureKind::MutualInformation, NullFamily::F) => {
            let other = if dims.k == 1 {
                dims.l
            } else if dims.l == 1 {
                dims.k
            } else {
                return Err(Error::InvalidInput("MI F-test needs a univariate side".into()));
            };
            let d1 = other as f64;
            let d2 = t - (other + dims.c + 1) as f64;
            if d2 <= 0.0 {
                return Err(Error::InvalidInput(format!("MI F-test has {d2} denominator dof")));
            }
            let stat = d2 / d1 * (2.0 * value).exp_m1();
            Ok(TestVerdict::new(family, stat, f_sf(stat, d1, d2)?, vec![d1, d2]))
        }
        (MeasureKind::GrangerCausality, NullFamily::ChiSquare) => {
            let stat = t * value;
            let df = (dims.k * dims.l * dims.q) as f64;
            Ok(TestVerdict::new(family, stat, chi2_sf(stat, df)?, vec![df]))
        }
        (MeasureKind::GrangerCausality, NullFamily::F) => {
            if dims.k != 1 {
                return Err(Error::InvalidInput("Granger F-test needs a univariate target".into()));
            }
            let lq = dims.l * dims.q;
            let d1 = lq as f64;
            let d2 = t - (dims.p + lq + dims.c + 1) as f64;
            if d2 <= 0.0 {
                return Err(Error::InvalidInput(format!("Granger F-test has {d2} denominator dof")));
            }
            let stat = d2 / d1 * value.exp_m1();
            Ok(TestVerdict::new(family, stat, f_sf(stat, d1, d2)?, vec![d1, d2]))
        }
        (_, other) => Err(Error::InvalidInput(format!("{other} is not a classical family"))),
    }
}

/// Whether the classical F-test applies to these dimensions.
pub(crate) fn f_applies(kind: MeasureKind, dims: &TestDims) -> bool {
    match kind {
        MeasureKind::MutualInformation => dims.k == 1 || dims.l == 1,
        MeasureKind::GrangerCausality => dims.k == 1,
    }
}
