use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{build_terms, check_term_dofs, clamp_warnings, DependenceResult, MeasureOptions};
use crate::error::{Error, Result};
use crate::linreg::{design_basis, residual_correlation, ChainStep};
use crate::nulldist::{NullFamily, TestVerdict};
use crate::special::{f_sf, t_cdf, t_sf, t_two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tails {
    #[default]
    Two,
    /// Alternative: positive correlation.
    Upper,
    /// Alternative: negative correlation.
    Lower,
}

/// Modified t-test of the Pearson correlation: `r sqrt(n / (1 - r^2)) ~ t(n)`
/// with `n = eta - 2`.
pub fn pearson_test_modified(x: &[f64], y: &[f64], tails: Tails, opts: &MeasureOptions) -> Result<DependenceResult> {
    partial_corr_test_modified(x, y, &Array2::zeros((0, x.len())), tails, opts)
}

/// Modified test of the partial correlation of `x` and `y` given the rows of
/// `w`, with dof `eta - c - 2` from the residual autocorrelations.
///
/// Reports the t statistic with the requested tails and the equivalent
/// F(1, n) test of its square (always two-sided).
pub fn partial_corr_test_modified(
    x: &[f64],
    y: &[f64],
    w: &Array2<f64>,
    tails: Tails,
    opts: &MeasureOptions,
) -> Result<DependenceResult> {
    let t = x.len();
    if y.len() != t || w.ncols() != t {
        return Err(Error::InvalidInput("x, y and w must be time-aligned".into()));
    }
    if t < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 samples, got {t}")));
    }
    if t <= w.nrows() + 2 {
        return Err(Error::InvalidInput("too few observations for the conditioning set".into()));
    }
    let basis = design_basis(w)?;
    let ex = basis.residual(x);
    let ey = basis.residual(y);
    let r = residual_correlation(&ex, &ey)?;
    let step = ChainStep { corr: r, target_residual: ex, predictor_residual: ey, conditioning_dim: w.nrows() };
    let terms = build_terms(std::slice::from_ref(&step), |_| vec![1, 1], &opts.taper, true)?;
    let dof = check_term_dofs(&terms)?;
    let n = dof[0];

    let r2 = r * r;
    let stat = if r2 < 1.0 { r * (n / (1.0 - r2)).sqrt() } else { r.signum() * f64::INFINITY };
    let mut verdicts = BTreeMap::new();
    if opts.wants(NullFamily::StudentT) {
        let p = match tails {
            Tails::Two => t_two_sided(stat, n)?,
            Tails::Upper => t_sf(stat, n)?,
            Tails::Lower => t_cdf(stat, n)?,
        };
        verdicts.insert(NullFamily::StudentT, TestVerdict::new(NullFamily::StudentT, stat, p, vec![n]));
    }
    if opts.wants(NullFamily::F) {
        let f = stat * stat;
        verdicts.insert(NullFamily::F, TestVerdict::new(NullFamily::F, f, f_sf(f, 1.0, n)?, vec![1.0, n]));
    }
    let warnings = clamp_warnings(&terms);
    Ok(DependenceResult { value: r, direct_value: None, terms, verdicts, n_obs: t, warnings })
}
