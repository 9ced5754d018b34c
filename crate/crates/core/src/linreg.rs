//! Least-squares residualization, partial correlation, generalized variances,
//! AR/ARMA fitting and information criteria.

use ndarray::{Array2, ArrayView1};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, row_covariance, solve_spd, OrthoBasis};
use crate::series::{demean_row, dot, mean};

/// Residuals of a set of regressions sharing one design.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    /// One row per response variable.
    pub residuals: Array2<f64>,
    /// Design columns including the intercept.
    pub regressor_count: usize,
    pub valid_length: usize,
}

impl ResidualSet {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.residuals.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

fn row_vec(r: ArrayView1<'_, f64>) -> Vec<f64> {
    r.iter().copied().collect()
}

/// Orthonormal basis for `[1; design]`, rows of `design` being regressors.
pub fn design_basis(design: &Array2<f64>) -> Result<OrthoBasis> {
    let mut basis = OrthoBasis::with_intercept(design.ncols());
    for row in design.rows() {
        basis.push(&row_vec(row))?;
    }
    Ok(basis)
}

/// Regresses each row of `targets` on the rows of `design` plus an
/// intercept and returns the residuals.
pub fn ols_residuals(targets: &Array2<f64>, design: &Array2<f64>) -> Result<ResidualSet> {
    let n = targets.ncols();
    if design.ncols() != n {
        return Err(Error::InvalidInput(format!("targets have {n} columns but the design has {}", design.ncols())));
    }
    if n <= design.nrows() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} regressors need more than {} observations",
            design.nrows() + 1,
            n
        )));
    }
    let basis = design_basis(design)?;
    let mut out = Array2::zeros(targets.dim());
    for (i, row) in targets.rows().into_iter().enumerate() {
        let e = basis.residual(&row_vec(row));
        out.row_mut(i).iter_mut().zip(e).for_each(|(o, v)| *o = v);
    }
    Ok(ResidualSet { residuals: out, regressor_count: basis.rank(), valid_length: n })
}

/// Correlation of two zero-mean residual vectors.
pub fn residual_correlation(ex: &[f64], ey: &[f64]) -> Result<f64> {
    let sxx = dot(ex, ex);
    let syy = dot(ey, ey);
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Degenerate("residual has zero variance".into()));
    }
    Ok((dot(ex, ey) / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between the residuals of `x` and `y` after regressing both on
/// the rows of `w` (and an intercept).
pub fn partial_correlation(x: &[f64], y: &[f64], w: &Array2<f64>) -> Result<f64> {
    if x.len() != y.len() || w.ncols() != x.len() {
        return Err(Error::InvalidInput("x, y and w must be time-aligned".into()));
    }
    if x.len() <= w.nrows() + 2 {
        return Err(Error::InvalidInput("too few observations for the conditioning set".into()));
    }
    let basis = design_basis(w)?;
    residual_correlation(&basis.residual(x), &basis.residual(y))
}

/// `log |S|` of the residual covariance `S = T'^-1 E E'`.
pub fn generalized_variance_logdet(residuals: &ResidualSet) -> Result<f64> {
    let s = row_covariance(&residuals.rows());
    logdet_spd(&s)
}

/// One step of a nested regression chain.
#[derive(Debug, Clone)]
pub struct ChainStep {
    /// Correlation of the two residuals.
    pub corr: f64,
    /// Residual of the target given everything before this step.
    pub target_residual: Vec<f64>,
    /// Residual of this step's predictor given everything before it.
    pub predictor_residual: Vec<f64>,
    /// Regressors (excluding the intercept) conditioned on at this step.
    pub conditioning_dim: usize,
}

/// Runs the nested chain `corr(target, pred_j | basis, pred_1..pred_{j-1})`
/// for each predictor in turn, growing `basis` as it goes.
///
/// Each step costs one projection; the residuals are identical to fitting
/// every nested regression from scratch.
pub fn nested_chain<'a, I>(basis: &mut OrthoBasis, target: &[f64], predictors: I) -> Result<Vec<ChainStep>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut ex = basis.residual(target);
    let mut steps = Vec::new();
    for pred in predictors {
        let ey = basis.residual(pred);
        let conditioning_dim = basis.rank() - 1;
        let corr = residual_correlation(&ex, &ey)?;
        steps.push(ChainStep { corr, target_residual: ex.clone(), predictor_residual: ey.clone(), conditioning_dim });
        basis.push_residual(pred, ey)?;
        basis.deflate_last(&mut ex);
    }
    Ok(steps)
}

/// Autoregressive model `x(t) = sum_u coefficients[u-1] x(t-u) + e(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub noise_variance: f64,
}

impl ArModel {
    pub fn is_stable(&self) -> bool {
        is_stationary(&self.coefficients)
    }
}

/// ARMA model `x(t) = sum ar_u x(t-u) + e(t) + sum ma_u e(t-u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaModel {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub noise_variance: f64,
    /// Gaussian conditional log-likelihood of the fit.
    pub log_likelihood: f64,
    /// Observations that entered the likelihood.
    pub n_obs: usize,
}

impl ArmaModel {
    pub fn n_params(&self) -> usize {
        self.ar.len() + self.ma.len() + 1
    }
}

/// Whether `1 - sum phi_u z^u` has all roots outside the unit circle, using
/// the step-down (Schur-Cohn) recursion to reflection coefficients.
pub fn is_stationary(phi: &[f64]) -> bool {
    let mut a: Vec<f64> = phi.iter().map(|v| -v).collect();
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0 - 1e-9) {
            return false;
        }
        let p = a.len();
        let denom = 1.0 - k * k;
        let next: Vec<f64> = (0..p - 1).map(|i| (a[i] - k * a[p - 2 - i]) / denom).collect();
        a = next;
    }
    true
}

/// Whether the MA polynomial `1 + sum theta_u z^u` is invertible.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
    is_stationary(&neg)
}

/// Roots of `c[0] + c[1] z + ... + c[n] z^n` (Durand-Kerner iteration).
fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..1000 {
        let mut shift = 0.0_f64;
        for i in 0..n {
            let zi = roots[i];
            let denom = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, &zj)| acc * (zi - zj));
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            shift = shift.max(step.norm());
        }
        if shift < 1e-14 {
            break;
        }
    }
    roots
}

/// MA coefficients with the same autocovariance shape whose polynomial
/// `1 + sum theta_u z^u` has every root outside the unit circle: roots inside
/// are replaced by their conjugate reciprocals. `None` if a root sits on the
/// circle, where no invertible equivalent exists.
pub fn reflect_to_invertible(theta: &[f64]) -> Option<Vec<f64>> {
    let Some(deg) = theta.iter().rposition(|&v| v != 0.0).map(|i| i + 1) else {
        return Some(theta.to_vec());
    };
    let coeffs: Vec<f64> = std::iter::once(1.0).chain(theta[..deg].iter().copied()).collect();
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for r in poly_roots(&coeffs) {
        let m = r.norm();
        if (m - 1.0).abs() < 1e-6 {
            return None;
        }
        let r = if m < 1.0 { 1.0 / r.conj() } else { r };
        // multiply by (1 - z / r)
        let f = -1.0 / r;
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, &a) in poly.iter().enumerate() {
            next[i] += a;
            next[i + 1] += a * f;
        }
        poly = next;
    }
    let mut out: Vec<f64> = poly[1..].iter().map(|c| c.re).collect();
    out.resize(theta.len(), 0.0);
    Some(out)
}

struct BurgPath {
    /// Prediction-error filters `a` (with implicit leading 1) for every order.
    filters: Vec<Vec<f64>>,
    /// Prediction-error power for every order.
    errors: Vec<f64>,
}

fn burg_path(x: &[f64], max_order: usize) -> BurgPath {
    let n = x.len();
    let mut f = x.to_vec();
    let mut b = x.to_vec();
    let mut a: Vec<f64> = Vec::new();
    let mut e = dot(x, x) / n as f64;
    let mut filters = vec![Vec::new()];
    let mut errors = vec![e];
    for m in 1..=max_order {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in m..n {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        let k = if den > 0.0 { -2.0 * num / den } else { 0.0 };
        for t in (m..n).rev() {
            let ft = f[t];
            f[t] = ft + k * b[t - 1];
            b[t] = b[t - 1] + k * ft;
        }
        let prev = a.clone();
        a.push(k);
        for i in 0..m - 1 {
            a[i] = prev[i] + k * prev[m - 2 - i];
        }
        e *= 1.0 - k * k;
        filters.push(a.clone());
        errors.push(e);
    }
    BurgPath { filters, errors }
}

fn check_burg_input(x: &[f64], order: usize) -> Result<Vec<f64>> {
    if x.len() <= 2 * order {
        return Err(Error::InvalidInput(format!(
            "AR order {order} needs more than {} samples, got {}",
            2 * order,
            x.len()
        )));
    }
    let d = demean_row(x);
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("cannot fit an AR model to a constant series".into()));
    }
    Ok(d)
}

fn ar_from_filter(a: &[f64], e: f64) -> ArModel {
    ArModel { order: a.len(), coefficients: a.iter().map(|v| -v).collect(), noise_variance: e }
}

/// Default largest order considered by [`burg_fit`]: `min(200, T/4)`.
pub fn default_max_order(t: usize) -> usize {
    (t / 4).min(200)
}

/// Burg AR fit of every order up to `max_order`; returns the order that
/// minimizes `N ln E_p + 2p` and its model.
pub fn burg_fit(x: &[f64], max_order: usize) -> Result<(usize, ArModel)> {
    let d = check_burg_input(x, max_order)?;
    let path = burg_path(&d, max_order);
    let n = d.len() as f64;
    let best = (0..=max_order)
        .filter(|&p| path.errors[p] > 0.0)
        .min_by(|&i, &j| {
            let ai = n * path.errors[i].ln() + 2.0 * i as f64;
            let aj = n * path.errors[j].ln() + 2.0 * j as f64;
            ai.total_cmp(&aj)
        })
        .unwrap_or(0);
    Ok((best, ar_from_filter(&path.filters[best], path.errors[best])))
}

/// Burg AR fit of a fixed order.
pub fn burg_fit_order(x: &[f64], order: usize) -> Result<ArModel> {
    let d = check_burg_input(x, order)?;
    let path = burg_path(&d, order);
    Ok(ar_from_filter(&path.filters[order], path.errors[order]))
}

/// Burg AR fits of every order `0..=max_order`, indexed by order.
pub fn burg_fit_all(x: &[f64], max_order: usize) -> Result<Vec<ArModel>> {
    let d = check_burg_input(x, max_order)?;
    let path = burg_path(&d, max_order);
    Ok(path.filters.iter().zip(&path.errors).map(|(a, &e)| ar_from_filter(a, e)).collect())
}

/// Partial autocorrelations `alpha(1..=max_lag)`, all computed over the common
/// target range `t = max_lag .. T`.
pub fn partial_autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    Ok(partial_autocorrelation_steps(x, max_lag)?.iter().map(|s| s.corr).collect())
}

/// The chain behind [`partial_autocorrelation`], keeping the residuals.
pub fn partial_autocorrelation_steps(x: &[f64], max_lag: usize) -> Result<Vec<ChainStep>> {
    let t = x.len();
    if max_lag == 0 || max_lag + 3 > t {
        return Err(Error::LagOutOfRange { lag: max_lag as i64, len: t });
    }
    let target = &x[max_lag..];
    let lags: Vec<&[f64]> = (1..=max_lag).map(|u| &x[max_lag - u..t - u]).collect();
    let mut basis = OrthoBasis::with_intercept(t - max_lag);
    nested_chain(&mut basis, target, lags)
}

/// AIC, small-sample corrected AIC and BIC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
}

pub fn information_criteria(loglik: f64, n_params: usize, n_obs: usize) -> Result<InformationCriteria> {
    if n_obs <= n_params + 1 {
        return Err(Error::InvalidInput(format!(
            "AICc needs more than {} observations for {n_params} parameters",
            n_params + 1
        )));
    }
    let k = n_params as f64;
    let t = n_obs as f64;
    let aic = -2.0 * loglik + 2.0 * k;
    Ok(InformationCriteria { aic, aicc: aic + 2.0 * k * (k + 1.0) / (t - k - 1.0), bic: -2.0 * loglik + k * t.ln() })
}

/// Conditional-sum-of-squares residuals of an ARMA model, starting at `t = p`
/// with pre-sample innovations set to zero.
pub fn arma_residuals(x: &[f64], ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let p = ar.len();
    let mut e = vec![0.0; x.len()];
    for t in p..x.len() {
        let mut v = x[t];
        for (i, a) in ar.iter().enumerate() {
            v -= a * x[t - i - 1];
        }
        for (i, m) in ma.iter().enumerate() {
            if t > i {
                v -= m * e[t - i - 1];
            }
        }
        e[t] = v;
    }
    e.split_off(p)
}

/// Gaussian log-likelihood from residuals with the variance profiled out.
fn gaussian_loglik(resid: &[f64]) -> (f64, f64) {
    let n = resid.len() as f64;
    let s2 = dot(resid, resid) / n;
    (-0.5 * n * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0), s2)
}

/// Two-stage Hannan-Rissanen ARMA(p, q) fit: a long Burg AR supplies
/// innovation estimates, then x is regressed on its own lags and the lagged
/// innovations.
pub fn arma_fit(x: &[f64], p: usize, q: usize) -> Result<ArmaModel> {
    let t = x.len();
    if p + q > 0 && t < 20 * (p + q) {
        return Err(Error::InvalidInput(format!("ARMA({p},{q}) needs at least {} samples, got {t}", 20 * (p + q))));
    }
    let d = demean_row(x);
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("cannot fit an ARMA model to a constant series".into()));
    }

    // stage 1: long autoregression for the innovations
    let (innov, start) = if q > 0 {
        let m = (t / 4).min((2 * (p + q)).max((10.0 * (t as f64).log10()).ceil() as usize));
        let long = burg_fit_order(&d, m)?;
        let mut e = vec![0.0; t];
        for s in m..t {
            e[s] = d[s] - (0..m).map(|i| long.coefficients[i] * d[s - i - 1]).sum::<f64>();
        }
        (e, m + q)
    } else {
        (Vec::new(), 0)
    };

    // stage 2: least squares on lagged values and lagged innovations
    let start = start.max(p);
    let nreg = p + q;
    let (ar, ma) = if nreg == 0 {
        (Vec::new(), Vec::new())
    } else {
        let cols: Vec<Vec<f64>> = (1..=p)
            .map(|u| d[start - u..t - u].to_vec())
            .chain((1..=q).map(|u| innov[start - u..t - u].to_vec()))
            .collect();
        let y = &d[start..];
        let mut xtx = Array2::zeros((nreg, nreg));
        let mut xty = vec![0.0; nreg];
        for i in 0..nreg {
            xty[i] = dot(&cols[i], y);
            for j in 0..=i {
                let v = dot(&cols[i], &cols[j]);
                xtx[[i, j]] = v;
                xtx[[j, i]] = v;
            }
        }
        let beta = solve_spd(&xtx, &xty).map_err(|e| Error::FitFailed(format!("ARMA({p},{q}) regression: {e}")))?;
        (beta[..p].to_vec(), beta[p..].to_vec())
    };
    if !is_stationary(&ar) {
        return Err(Error::FitFailed(format!("ARMA({p},{q}) fit is not stationary")));
    }
    let ma = if is_invertible(&ma) {
        ma
    } else {
        reflect_to_invertible(&ma)
            .filter(|m| is_invertible(m))
            .ok_or_else(|| Error::FitFailed(format!("ARMA({p},{q}) fit has an MA root on the unit circle")))?
    };
    let resid = arma_residuals(&d, &ar, &ma);
    let (loglik, s2) = gaussian_loglik(&resid);
    if !(s2 > 0.0) || !loglik.is_finite() {
        return Err(Error::FitFailed("non-positive innovation variance".into()));
    }
    Ok(ArmaModel { ar, ma, noise_variance: s2, log_likelihood: loglik, n_obs: resid.len() })
}

/// Pearson correlation of two rows.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let ex: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let ey: Vec<f64> = y.iter().map(|v| v - my).collect();
    residual_correlation(&ex, &ey)
}
