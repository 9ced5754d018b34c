use std::collections::BTreeMap;

use super::classical::{classical_test, f_applies, MeasureKind, TestDims};
use super::{build_terms, clamp_warnings, lambda_star_verdict, DependenceResult, MeasureOptions};
use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, row_covariance, OrthoBasis};
use crate::linreg::nested_chain;
use crate::nulldist::NullFamily;
use crate::series::{Partition, TimeSeriesMatrix};

/// Granger causality from the y block to the x block given w,
/// `F = log(|S_x|X^(p) W| / |S_x|X^(p) Y^(q) W|)`, with own history `p` and
/// source history `q`.
///
/// All regressions share the target range `t = max(p, q) .. T`. The chain
/// runs over target dimension g, source dimension h and source lag j, term
/// `(g, h, j)` conditioning on the present of x_1..x_{g-1}, the full own
/// history X^(p), all q lags of y_1..y_{h-1}, lags 1..j-1 of y_h, and w.
pub fn granger_causality(
    series: &TimeSeriesMatrix,
    partition: &Partition,
    p: usize,
    q: usize,
    opts: &MeasureOptions,
) -> Result<DependenceResult> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidInput("Granger causality needs p >= 1 and q >= 1".into()));
    }
    let rows = series.partition_rows(partition)?;
    let t = series.len();
    let (k, l, c) = (partition.k(), partition.l(), partition.c());
    let start = p.max(q);
    let regressors = k + k * p + l * q + c;
    if start >= t || t - start <= regressors + 2 {
        return Err(Error::InvalidInput(format!("{t} samples are too few for p={p}, q={q} with k={k}, l={l}, c={c}")));
    }
    let n = t - start;
    let present = |r: &[f64]| -> Vec<f64> { r[start..].to_vec() };
    let lagged = |r: &'_ [f64], u: usize| -> Vec<f64> { r[start - u..t - u].to_vec() };

    let x_now: Vec<Vec<f64>> = rows.x.iter().map(|r| present(r)).collect();
    let own_history: Vec<Vec<f64>> = rows.x.iter().flat_map(|r| (1..=p).map(move |u| lagged(r, u))).collect();
    let source_history: Vec<Vec<f64>> = rows.y.iter().flat_map(|r| (1..=q).map(move |u| lagged(r, u))).collect();

    let mut base = OrthoBasis::with_intercept(n);
    for w in &rows.w {
        base.push(&present(w))?;
    }
    for h in &own_history {
        base.push(h)?;
    }

    let with_dof = opts.wants(NullFamily::LambdaStar);
    let mut terms = Vec::with_capacity(k * l * q);
    // after the first chain its basis spans the unrestricted design
    let mut full = None;
    for g in 0..k {
        let mut basis = base.clone();
        for xr in &x_now[..g] {
            basis.push(xr)?;
        }
        let steps = nested_chain(&mut basis, &x_now[g], source_history.iter().map(Vec::as_slice))?;
        terms.extend(build_terms(&steps, |i| vec![g + 1, i / q + 1, i % q + 1], &opts.taper, with_dof)?);
        full.get_or_insert(basis);
    }
    let full = full.expect("k >= 1");

    // direct form: restricted and unrestricted residual covariances of X
    let restricted: Vec<Vec<f64>> = x_now.iter().map(|x| base.residual(x)).collect();
    let unrestricted: Vec<Vec<f64>> = x_now.iter().map(|x| full.residual(x)).collect();
    let direct = logdet_spd(&row_covariance(&restricted))? - logdet_spd(&row_covariance(&unrestricted))?;
    let value: f64 = terms.iter().map(|t| -(-t.partial_corr * t.partial_corr).ln_1p()).sum();

    let mut verdicts = BTreeMap::new();
    if with_dof {
        verdicts.insert(NullFamily::LambdaStar, lambda_star_verdict(&terms, opts)?);
    }
    let dims = TestDims { n_obs: n, k, l, c, p, q };
    if opts.wants(NullFamily::ChiSquare) {
        let v = classical_test(MeasureKind::GrangerCausality, NullFamily::ChiSquare, value, &dims)?;
        verdicts.insert(NullFamily::ChiSquare, v);
    }
    if opts.wants(NullFamily::F) && f_applies(MeasureKind::GrangerCausality, &dims) {
        let v = classical_test(MeasureKind::GrangerCausality, NullFamily::F, value, &dims)?;
        verdicts.insert(NullFamily::F, v);
    }
    let warnings = clamp_warnings(&terms);
    Ok(DependenceResult { value, direct_value: Some(direct), terms, verdicts, n_obs: n, warnings })
}
