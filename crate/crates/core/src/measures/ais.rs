use crate::error::{Error, Result};
use crate::linreg::partial_autocorrelation;
use crate::special::chi2_sf;

/// Active information storage of order `p`,
/// `A(p) = -1/2 sum_{u<=p} log(1 - alpha(u)^2)`, from the partial
/// autocorrelations on the range `t = p .. T`.
pub fn active_information_storage(x: &[f64], p: usize) -> Result<f64> {
    if p == 0 {
        return Ok(0.0);
    }
    let alpha = partial_autocorrelation(x, p)?;
    Ok(alpha.iter().map(|a| -0.5 * (-a * a).ln_1p()).sum())
}

/// Increments `delta(u) = A(u+1) - A(u)` for `u = 0 .. max_p - 1`, all on the
/// common range `t = max_p .. T`.
pub fn ais_increments(x: &[f64], max_p: usize) -> Result<Vec<f64>> {
    let alpha = partial_autocorrelation(x, max_p)?;
    Ok(alpha.iter().map(|a| -0.5 * (-a * a).ln_1p()).collect())
}

/// Embedding order selected by testing `2 T' delta(u-1) = -T' log(1 - alpha(u)^2)`
/// against χ²(1) for `u = 1, 2, ...` and stopping at the first lag that is
/// not significant at `alpha`. Returns the last significant lag (0 if none).
pub fn ais_embedding_select(x: &[f64], max_p: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if max_p == 0 {
        return Ok(0);
    }
    let deltas = ais_increments(x, max_p)?;
    let n = (x.len() - max_p) as f64;
    for (i, d) in deltas.iter().enumerate() {
        if chi2_sf(2.0 * n * d, 1.0)? >= alpha {
            return Ok(i);
        }
    }
    Ok(max_p)
}
