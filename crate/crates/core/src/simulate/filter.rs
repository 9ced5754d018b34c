use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::series::TimeSeriesMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// Linear-phase least-squares FIR low-pass.
    FirLeastSquares,
    /// IIR Butterworth low-pass.
    Butterworth,
}

/// Low-pass filter description; order 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    #[serde(default)]
    pub order: usize,
    /// Cutoff in radians per sample.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

fn default_cutoff() -> f64 {
    PI / 2.0
}

impl FilterSpec {
    pub fn fir(order: usize) -> Self {
        Self { kind: FilterKind::FirLeastSquares, order, cutoff: default_cutoff() }
    }

    pub fn butterworth(order: usize) -> Self {
        Self { kind: FilterKind::Butterworth, order, cutoff: default_cutoff() }
    }

    pub fn identity() -> Self {
        Self::fir(0)
    }

    pub fn design(&self) -> Result<DesignedFilter> {
        if !(self.cutoff > 0.0 && self.cutoff < PI) {
            return Err(Error::Config(format!("cutoff {} must lie in (0, pi)", self.cutoff)));
        }
        if self.order == 0 {
            return Ok(DesignedFilter::Identity);
        }
        Ok(match self.kind {
            FilterKind::FirLeastSquares => DesignedFilter::Fir(fir_ls_design(self.order, self.cutoff)),
            FilterKind::Butterworth => DesignedFilter::Sos(butterworth_design(self.order, self.cutoff)?),
        })
    }
}

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sos {
    pub b: [f64; 3],
    /// `[1, a1, a2]`.
    pub a: [f64; 3],
}

impl Sos {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        let a0 = a[0];
        Self { b: b.map(|v| v / a0), a: a.map(|v| v / a0) }
    }

    pub fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + z1 * self.b[1] + z2 * self.b[2]) / (self.a[0] + z1 * self.a[1] + z2 * self.a[2])
    }

    /// Pole moduli of the section.
    pub fn pole_moduli(&self) -> [f64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            let m = a2.sqrt();
            [m, m]
        } else {
            let s = disc.sqrt();
            [(-a1 + s).abs() / 2.0, (-a1 - s).abs() / 2.0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignedFilter {
    Identity,
    Fir(Vec<f64>),
    Sos(Vec<Sos>),
}

impl DesignedFilter {
    /// Frequency response at `w` radians per sample.
    pub fn response(&self, w: f64) -> Complex64 {
        match self {
            DesignedFilter::Identity => Complex64::new(1.0, 0.0),
            DesignedFilter::Fir(h) => h.iter().enumerate().map(|(n, &c)| Complex64::from_polar(c, -w * n as f64)).sum(),
            DesignedFilter::Sos(s) => s.iter().map(|sec| sec.response(w)).product(),
        }
    }
}

/// `int_{lo}^{hi} cos(f w) dw`.
fn cos_integral(f: f64, lo: f64, hi: f64) -> f64 {
    if f == 0.0 {
        hi - lo
    } else {
        ((f * hi).sin() - (f * lo).sin()) / f
    }
}

/// Linear-phase least-squares low-pass FIR with `order + 1` taps.
///
/// Minimizes the integrated squared error against an ideal response of 1 on
/// `[0, 0.95 cutoff]` and 0 on `[1.05 cutoff, pi]`. Even orders give a
/// symmetric odd-length (type I) filter, odd orders a symmetric even-length
/// (type II) filter. Order 0 is the identity.
pub fn fir_ls_design(order: usize, cutoff: f64) -> Vec<f64> {
    if order == 0 {
        return vec![1.0];
    }
    let taps = order + 1;
    let pass = 0.95 * cutoff;
    let stop = (1.05 * cutoff).min(PI);
    // amplitude A(w) = sum_n a_n cos(f_n w)
    let freqs: Vec<f64> = if taps % 2 == 1 {
        (0..=order / 2).map(|n| n as f64).collect()
    } else {
        (1..=taps / 2).map(|n| n as f64 - 0.5).collect()
    };
    let m = freqs.len();
    let band = |f: f64| cos_integral(f, 0.0, pass) + cos_integral(f, stop, PI);
    let mut q = ndarray::Array2::zeros((m, m));
    let mut d = vec![0.0; m];
    for i in 0..m {
        d[i] = cos_integral(freqs[i], 0.0, pass);
        for j in 0..=i {
            let v = 0.5 * (band(freqs[i] - freqs[j]) + band(freqs[i] + freqs[j]));
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    let a = solve_spd(&q, &d).expect("least-squares FIR normal equations are positive definite");
    let mut h = vec![0.0; taps];
    let centre = order as f64 / 2.0;
    for (n, f) in freqs.iter().enumerate() {
        let coef = if *f == 0.0 { a[n] } else { 0.5 * a[n] };
        let lo = (centre - f) as usize;
        let hi = (centre + f) as usize;
        h[lo] = coef;
        h[hi] = coef;
    }
    h
}

fn butterworth_prototype_poles(order: usize) -> Vec<Complex64> {
    let n = order as f64;
    (0..order).map(|k| Complex64::from_polar(1.0, PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n))).collect()
}

/// Bilinear transform of `num(s) / (s^2 + d1 s + d0)`, where the numerator is
/// already expressed in powers of `z^-1`.
fn bilinear_quadratic(d1: f64, d0: f64, num: [f64; 3]) -> Sos {
    const C: f64 = 2.0;
    let a = [C * C + d1 * C + d0, -2.0 * C * C + 2.0 * d0, C * C - d1 * C + d0];
    Sos::normalized(num, a)
}

/// Section for the analog pole pair `(p, conj p)`.
fn bilinear_pair(p: Complex64, num: [f64; 3]) -> Sos {
    bilinear_quadratic(-2.0 * p.re, p.norm_sqr(), num)
}

/// Butterworth low-pass of the given order as a cascade of second-order
/// sections (a first-order section is padded with zeros), obtained from the
/// analog prototype with prewarped cutoff by the bilinear transform. Each
/// section has unit gain at DC.
pub fn butterworth_design(order: usize, cutoff: f64) -> Result<Vec<Sos>> {
    if order == 0 {
        return Err(Error::Config("Butterworth order must be at least 1".into()));
    }
    if !(cutoff > 0.0 && cutoff < PI) {
        return Err(Error::Config(format!("cutoff {cutoff} must lie in (0, pi)")));
    }
    let wc = 2.0 * (cutoff / 2.0).tan();
    let mut sections = Vec::new();
    for p in butterworth_prototype_poles(order) {
        let p = p * wc;
        if p.im > 1e-12 * wc {
            let m = p.norm_sqr();
            sections.push(bilinear_pair(p, [m, 2.0 * m, m]));
        } else if p.im.abs() <= 1e-12 * wc {
            let r = p.re;
            sections.push(Sos::normalized([-r, -r, 0.0], [2.0 - r, -2.0 - r, 0.0]));
        }
    }
    Ok(sections)
}

/// Butterworth band-pass between `low` and `high` (radians per sample).
/// The low-pass prototype of the given order becomes `order` second-order
/// sections, each normalized to unit gain at the geometric centre.
pub fn butterworth_bandpass(order: usize, low: f64, high: f64) -> Result<Vec<Sos>> {
    if order == 0 {
        return Err(Error::Config("band-pass order must be at least 1".into()));
    }
    if !(low > 0.0 && low < high && high < PI) {
        return Err(Error::Config(format!("band edges {low}, {high} must satisfy 0 < low < high < pi")));
    }
    let w1 = 2.0 * (low / 2.0).tan();
    let w2 = 2.0 * (high / 2.0).tan();
    let w0sq = w1 * w2;
    let bw = w2 - w1;
    let centre = 2.0 * (w0sq.sqrt() / 2.0).atan();
    let normalize = |mut sec: Sos| {
        let g = sec.response(centre).norm();
        sec.b = sec.b.map(|v| v / g);
        sec
    };
    let mut sections = Vec::new();
    for p in butterworth_prototype_poles(order) {
        if p.im.abs() <= 1e-12 {
            // a real prototype pole maps to the real quadratic s^2 - p B s + w0^2
            sections.push(normalize(bilinear_quadratic(-p.re * bw, w0sq, [2.0, 0.0, -2.0])));
        } else if p.im > 0.0 {
            // roots of s^2 - p B s + w0^2, each paired with its conjugate,
            // which is a root for the conjugate prototype pole
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0sq).sqrt();
            for r in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                sections.push(normalize(bilinear_pair(r, [2.0, 0.0, -2.0])));
            }
        }
    }
    debug_assert_eq!(sections.len(), order);
    Ok(sections)
}

fn sos_filter(sections: &[Sos], x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for s in sections {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in y.iter_mut() {
            let input = *v;
            let out = s.b[0] * input + z1;
            z1 = s.b[1] * input - s.a[1] * out + z2;
            z2 = s.b[2] * input - s.a[2] * out;
            *v = out;
        }
    }
    y
}

fn fir_filter(h: &[f64], x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|t| h.iter().take(t + 1).enumerate().map(|(i, c)| c * x[t - i]).sum()).collect()
}

/// Causal filtering of one row with zero initial conditions.
pub fn filter_row(filter: &DesignedFilter, x: &[f64]) -> Vec<f64> {
    match filter {
        DesignedFilter::Identity => x.to_vec(),
        DesignedFilter::Fir(h) => fir_filter(h, x),
        DesignedFilter::Sos(s) => sos_filter(s, x),
    }
}

/// Zero-phase filtering: a forward pass followed by a backward pass.
pub fn filtfilt_row(filter: &DesignedFilter, x: &[f64]) -> Vec<f64> {
    let mut y = filter_row(filter, x);
    y.reverse();
    let mut z = filter_row(filter, &y);
    z.reverse();
    z
}

/// Causal filtering of every row; output length is unchanged.
pub fn filter_apply(series: &TimeSeriesMatrix, spec: &FilterSpec) -> Result<TimeSeriesMatrix> {
    let f = spec.design()?;
    if f == DesignedFilter::Identity {
        return Ok(series.clone());
    }
    series.map_rows(|r| filter_row(&f, r))
}
