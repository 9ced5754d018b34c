use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linreg::{
    arma_fit, arma_residuals, burg_fit, burg_fit_all, burg_fit_order, default_max_order, information_criteria,
};
use crate::series::demean_row;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrewhitenModel {
    /// AR(1) by Burg.
    Ar1,
    /// ARMA(1,1).
    Arma11,
    /// Burg AR with AIC-selected order.
    ArpBurg,
    /// Burg AR with AICc-selected order.
    ArpAicc,
    /// Burg AR with BIC-selected order.
    ArpBic,
    /// ARMA(p,q) with p, q in 1..=5 selected by BIC.
    ArmapqBic,
}

impl PrewhitenModel {
    pub const ALL: [PrewhitenModel; 6] = [
        PrewhitenModel::Ar1,
        PrewhitenModel::Arma11,
        PrewhitenModel::ArpBurg,
        PrewhitenModel::ArpAicc,
        PrewhitenModel::ArpBic,
        PrewhitenModel::ArmapqBic,
    ];
}

/// Both rows passed through the inverse filter of the model fitted to x.
/// The first `ar.len()` samples are dropped from each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prewhitened {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
}

const GRID_MAX: usize = 5;

fn fit(x: &[f64], model: PrewhitenModel) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = x.len();
    match model {
        PrewhitenModel::Ar1 => Ok((burg_fit_order(x, 1)?.coefficients, Vec::new())),
        PrewhitenModel::Arma11 => {
            let m = arma_fit(x, 1, 1)?;
            Ok((m.ar, m.ma))
        }
        PrewhitenModel::ArpBurg => Ok((burg_fit(x, default_max_order(t))?.1.coefficients, Vec::new())),
        PrewhitenModel::ArpAicc | PrewhitenModel::ArpBic => {
            let models = burg_fit_all(x, default_max_order(t))?;
            let mut best: Option<(f64, usize)> = None;
            for (p, m) in models.iter().enumerate().skip(1) {
                if !(m.noise_variance > 0.0) {
                    continue;
                }
                let ll = -0.5 * t as f64 * ((2.0 * PI * m.noise_variance).ln() + 1.0);
                let Ok(ic) = information_criteria(ll, p + 1, t) else { continue };
                let score = if model == PrewhitenModel::ArpAicc { ic.aicc } else { ic.bic };
                if best.is_none_or(|(s, _)| score < s) {
                    best = Some((score, p));
                }
            }
            let (_, p) = best.ok_or_else(|| Error::FitFailed("no admissible AR order".into()))?;
            Ok((models[p].coefficients.clone(), Vec::new()))
        }
        PrewhitenModel::ArmapqBic => {
            let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
            let mut last_err = None;
            for p in 1..=GRID_MAX {
                for q in 1..=GRID_MAX {
                    let m = match arma_fit(x, p, q) {
                        Ok(m) => m,
                        Err(e) => {
                            last_err = Some(e);
                            continue;
                        }
                    };
                    let Ok(ic) = information_criteria(m.log_likelihood, m.n_params(), m.n_obs) else { continue };
                    if best.as_ref().is_none_or(|(s, _, _)| ic.bic < *s) {
                        best = Some((ic.bic, m.ar, m.ma));
                    }
                }
            }
            match best {
                Some((_, ar, ma)) => Ok((ar, ma)),
                None => Err(Error::FitFailed(format!(
                    "no ARMA(p,q) fit succeeded on the grid{}",
                    last_err.map(|e| format!(": {e}")).unwrap_or_default()
                ))),
            }
        }
    }
}

/// Fits `model` to x alone and applies the same inverse filter,
/// `e(t) = s(t) - sum phi_u s(t-u) - sum theta_u e(t-u)`, to both demeaned
/// rows.
pub fn prewhiten(x: &[f64], y: &[f64], model: PrewhitenModel) -> Result<Prewhitened> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!("row lengths differ: {} vs {}", x.len(), y.len())));
    }
    let xd = demean_row(x);
    let yd = demean_row(y);
    let (ar, ma) = fit(&xd, model).map_err(|e| match e {
        Error::FitFailed(_) => e,
        other => Error::FitFailed(format!("{model:?}: {other}")),
    })?;
    Ok(Prewhitened { x: arma_residuals(&xd, &ar, &ma), y: arma_residuals(&yd, &ar, &ma), ar, ma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linreg::pearson;
    use crate::series::{sample_autocorrelation, LagWindow};
    use crate::testutil::{arma, white};

    fn lag1(x: &[f64]) -> f64 {
        sample_autocorrelation(&demean_row(x), 1, LagWindow::None).unwrap().values[1]
    }

    #[test]
    fn white_input_is_nearly_untouched() {
        let x = white(512, 1);
        let y = white(512, 2);
        let pw = prewhiten(&x, &y, PrewhitenModel::Ar1).unwrap();
        assert!(pw.ar[0].abs() < 0.1);
        assert_eq!(pw.x.len(), 511);
        let xd = demean_row(&x);
        let dev = pw.x.iter().zip(&xd[1..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 0.1 * xd.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }

    #[test]
    fn ar1_is_whitened() {
        let x = arma(&[0.3], &[], 512, 3);
        let y = white(512, 4);
        let pw = prewhiten(&x, &y, PrewhitenModel::Ar1).unwrap();
        assert!(lag1(&pw.x).abs() < 2.0 / (512f64).sqrt());
    }

    #[test]
    fn every_model_whitens_an_arma_process() {
        let x = arma(&[0.6], &[0.4], 1024, 5);
        let y = white(1024, 6);
        for model in PrewhitenModel::ALL {
            let pw = prewhiten(&x, &y, model).unwrap();
            assert_eq!(pw.x.len(), pw.y.len());
            assert_eq!(pw.x.len(), 1024 - pw.ar.len());
            if model != PrewhitenModel::Ar1 {
                assert!(lag1(&pw.x).abs() < 3.0 / 32.0, "{model:?}: {}", lag1(&pw.x));
            }
        }
    }

    #[test]
    fn correlation_survives_joint_filtering() {
        // y shares x's innovations up to noise, so both rows carry the same dynamics
        let t = 2048;
        let e = white(t, 7);
        let n = white(t, 8);
        let mut x = vec![0.0; t];
        let mut y = vec![0.0; t];
        for i in 1..t {
            x[i] = 0.5 * x[i - 1] + e[i];
            y[i] = 0.5 * y[i - 1] + 0.6 * e[i] + 0.8 * n[i];
        }
        let before = pearson(&x, &y).unwrap();
        let pw = prewhiten(&x, &y, PrewhitenModel::ArpBurg).unwrap();
        let after = pearson(&pw.x, &pw.y).unwrap();
        assert!(before.signum() == after.signum());
        assert!((before - after).abs() < 0.1, "{before} {after}");
    }

    #[test]
    fn failures_are_fit_failed() {
        let x = vec![1.0; 64];
        let y = white(64, 9);
        assert!(matches!(prewhiten(&x, &y, PrewhitenModel::Ar1), Err(Error::FitFailed(_))));
        assert!(matches!(prewhiten(&x[..10], &y[..10], PrewhitenModel::ArmapqBic), Err(Error::FitFailed(_))));
        assert!(matches!(prewhiten(&x, &y[..5], PrewhitenModel::Ar1), Err(Error::InvalidInput(_))));
    }
}
