use std::collections::BTreeMap;

use super::classical::{classical_test, f_applies, MeasureKind, TestDims};
use super::{build_terms, chain_information, clamp_warnings, lambda_star_verdict, DependenceResult, MeasureOptions};
use crate::error::Result;
use crate::linalg::{logdet_spd, row_covariance, OrthoBasis};
use crate::linreg::nested_chain;
use crate::nulldist::NullFamily;
use crate::series::{Partition, TimeSeriesMatrix};

/// Gaussian (conditional, multivariate) mutual information
/// `I(X; Y | W) = -1/2 log(|S_xy|w| / (|S_x|w| |S_y|w|))`.
///
/// The value is assembled from the chain of partial correlations
/// `r(x_g, y_h | x_1..x_{g-1}, y_1..y_{h-1}, w)` (y index innermost), each of
/// which gets its own effective dof. The direct generalized-variance form is
/// reported as `direct_value`.
pub fn mi_gaussian(
    series: &TimeSeriesMatrix,
    partition: &Partition,
    opts: &MeasureOptions,
) -> Result<DependenceResult> {
    let rows = series.partition_rows(partition)?;
    let t = series.len();
    let (k, l, c) = (partition.k(), partition.l(), partition.c());
    if t <= k + l + c + 2 {
        return Err(crate::Error::InvalidInput(format!("{t} samples are too few for k={k}, l={l}, c={c}")));
    }

    let mut base = OrthoBasis::with_intercept(t);
    for w in &rows.w {
        base.push(w)?;
    }

    // direct form from the joint residual covariance
    let resid: Vec<Vec<f64>> = rows.x.iter().chain(&rows.y).map(|r| base.residual(r)).collect();
    let ld_xy = logdet_spd(&row_covariance(&resid))?;
    let ld_x = logdet_spd(&row_covariance(&resid[..k]))?;
    let ld_y = logdet_spd(&row_covariance(&resid[k..]))?;
    let direct = -0.5 * (ld_xy - ld_x - ld_y);

    let with_dof = opts.wants(NullFamily::LambdaStar);
    let mut terms = Vec::with_capacity(k * l);
    for g in 0..k {
        let mut basis = base.clone();
        for xr in &rows.x[..g] {
            basis.push(xr)?;
        }
        let steps = nested_chain(&mut basis, rows.x[g], rows.y.iter().copied())?;
        terms.extend(build_terms(&steps, |h| vec![g + 1, h + 1], &opts.taper, with_dof)?);
    }
    let value = chain_information(&terms);

    let mut verdicts = BTreeMap::new();
    if with_dof {
        verdicts.insert(NullFamily::LambdaStar, lambda_star_verdict(&terms, opts)?);
    }
    let dims = TestDims { n_obs: t, k, l, c, p: 0, q: 0 };
    if opts.wants(NullFamily::ChiSquare) {
        let v = classical_test(MeasureKind::MutualInformation, NullFamily::ChiSquare, value, &dims)?;
        verdicts.insert(NullFamily::ChiSquare, v);
    }
    if opts.wants(NullFamily::F) && f_applies(MeasureKind::MutualInformation, &dims) {
        let v = classical_test(MeasureKind::MutualInformation, NullFamily::F, value, &dims)?;
        verdicts.insert(NullFamily::F, v);
    }
    let warnings = clamp_warnings(&terms);
    Ok(DependenceResult { value, direct_value: Some(direct), terms, verdicts, n_obs: t, warnings })
}
