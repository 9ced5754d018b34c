//! Small dense kernels: an incrementally grown orthonormal basis (the QR
//! factorization behind every regression here) and Cholesky-based log
//! determinants.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::series::dot;

/// Reciprocal-condition threshold below which a design is rejected.
pub const RCOND_TOL: f64 = 1e-12;

/// Orthonormal basis of a growing set of regressors, always seeded with the
/// intercept column.
///
/// Columns are orthogonalized by classical Gram-Schmidt with one full
/// reorthogonalization pass, which keeps the basis orthogonal to working
/// precision even for hundreds of nearly collinear lagged regressors.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    len: usize,
    cols: Vec<Vec<f64>>,
}

impl OrthoBasis {
    /// Basis holding only the normalized intercept.
    pub fn with_intercept(len: usize) -> Self {
        let v = 1.0 / (len as f64).sqrt();
        Self { len, cols: vec![vec![v; len]] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of basis columns, including the intercept.
    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    fn project_out(&self, v: &mut [f64]) {
        for _ in 0..2 {
            for q in &self.cols {
                let c = dot(q, v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
    }

    /// Residual of `v` after projection onto the span of the basis.
    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.len);
        let mut r = v.to_vec();
        self.project_out(&mut r);
        r
    }

    /// Residual of `v`, then `v` itself is added to the basis. Returns the
    /// residual (unnormalized), i.e. the new direction before scaling.
    pub fn push(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        let r = self.residual(v);
        self.push_residual(v, r.clone())?;
        Ok(r)
    }

    /// Adds a column whose residual `r` has already been computed.
    pub fn push_residual(&mut self, original: &[f64], r: Vec<f64>) -> Result<()> {
        let norm_v = dot(original, original).sqrt();
        let norm_r = dot(&r, &r).sqrt();
        // relative size of the new direction; a tiny value means the column
        // is (numerically) in the span of what is already there
        let rcond = if norm_v > 0.0 { norm_r / norm_v } else { 0.0 };
        if !(rcond >= RCOND_TOL) {
            return Err(Error::IllConditioned { rcond });
        }
        let inv = 1.0 / norm_r;
        self.cols.push(r.into_iter().map(|x| x * inv).collect());
        Ok(())
    }

    /// The most recently added unit column.
    pub fn last(&self) -> &[f64] {
        self.cols.last().expect("basis always holds the intercept")
    }

    /// Removes the component along the most recently added column from `e`.
    pub fn deflate_last(&self, e: &mut [f64]) {
        let q = self.last();
        let c = dot(q, e);
        e.iter_mut().zip(q).for_each(|(ei, qi)| *ei -= c * qi);
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
///
/// A pivot that falls below `1e-12` times the largest diagonal entry is
/// treated as singular.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput("cholesky needs a square matrix".into()));
    }
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > RCOND_TOL * scale) || !d.is_finite() {
            return Err(Error::Degenerate(format!("matrix is not positive definite (pivot {d:.3e} at {j})")));
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Ok(l)
}

/// `log |A|` for symmetric positive-definite `A`, as twice the sum of the log
/// Cholesky pivots.
pub fn logdet_spd(a: &Array2<f64>) -> Result<f64> {
    let l = cholesky(a)?;
    Ok(2.0 * l.diag().iter().map(|d| d.ln()).sum::<f64>())
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    let n = b.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[[i, k]] * y[k];
        }
        y[i] /= l[[i, i]];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[[k, i]] * y[k];
        }
        y[i] /= l[[i, i]];
    }
    Ok(y)
}

/// Sample covariance `n^-1 E E'` of the rows of `e` (rows assumed centred).
pub fn row_covariance(rows: &[Vec<f64>]) -> Array2<f64> {
    let m = rows.len();
    let n = rows.first().map_or(1, Vec::len) as f64;
    let mut s = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..=i {
            let v = dot(&rows[i], &rows[j]) / n;
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    s
}
