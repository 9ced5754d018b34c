//! Time-series containers, sample moments, auto/cross-correlation and lag
//! embeddings.
//!
//! A [`TimeSeriesMatrix`] holds `m` aligned series as the rows of an `m x T`
//! matrix. Everything downstream reads rows as contiguous slices.

use std::cell::RefCell;
use std::collections::HashSet;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `m` equally spaced, aligned series stored as the rows of an `m x T` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    data: Array2<f64>,
    names: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (m, t) = data.dim();
        if m < 1 {
            return Err(Error::InvalidInput("a series matrix needs at least one row".into()));
        }
        if t < 2 {
            return Err(Error::InvalidInput(format!("a series needs at least 2 time points, got {t}")));
        }
        if let Some((idx, v)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value {v} at row {}, column {}", idx / t, idx % t)));
        }
        // Rows must be contiguous so they can be handed out as slices.
        let data = if data.is_standard_layout() { data } else { data.as_standard_layout().into_owned() };
        Ok(Self { data, names: None })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::InvalidInput("rows have different lengths".into()));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let data = Array2::from_shape_vec((m, t), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(data)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_vars() {
            return Err(Error::InvalidInput(format!("{} names given for {} variables", names.len(), self.n_vars())));
        }
        self.names = Some(names);
        Ok(self)
    }

    /// Number of variables `m`.
    pub fn n_vars(&self) -> usize {
        self.data.nrows()
    }

    /// Number of time points `T`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i).to_slice().expect("series matrix is kept in standard layout")
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_vars()).map(move |i| self.row(i))
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n_vars()) {
            return Err(Error::InvalidInput(format!("row {bad} out of range for {} variables", self.n_vars())));
        }
        let rows = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        let mut out = Self::from_rows(rows)?;
        if let Some(names) = &self.names {
            out.names = Some(idx.iter().map(|&i| names[i].clone()).collect());
        }
        Ok(out)
    }

    /// Keeps time points `start..end`.
    pub fn slice_time(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidInput(format!("time range {start}..{end} invalid for length {}", self.len())));
        }
        let rows = self.rows().map(|r| r[start..end].to_vec()).collect();
        let mut out = Self::from_rows(rows)?;
        out.names.clone_from(&self.names);
        Ok(out)
    }

    /// Applies `f` to every row.
    pub fn map_rows<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let rows = self.rows().map(&mut f).collect();
        let mut out = Self::from_rows(rows)?;
        out.names.clone_from(&self.names);
        Ok(out)
    }

    /// Extracts the x, y and w blocks of a partition as row lists.
    pub fn partition_rows(&self, partition: &Partition) -> Result<PartitionRows<'_>> {
        partition.validate(self.n_vars())?;
        let pick = |idx: &[usize]| idx.iter().map(|&i| self.row(i)).collect::<Vec<_>>();
        Ok(PartitionRows { x: pick(&partition.x_rows), y: pick(&partition.y_rows), w: pick(&partition.w_rows) })
    }

    pub fn demean(&self) -> Self {
        let rows = self.rows().map(demean_row).collect();
        let mut out = Self::from_rows(rows).expect("demeaning preserves shape and finiteness");
        out.names.clone_from(&self.names);
        out
    }

    /// First differences `z(t) - z(t-1)`; the result is one sample shorter.
    pub fn first_difference(&self) -> Result<Self> {
        self.map_rows(|r| r.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// Reads a CSV file with one variable per column and time running down
    /// the rows. The header row is detected automatically unless `has_header`
    /// is given.
    pub fn from_csv_path(path: impl AsRef<Path>, has_header: Option<bool>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Ingestion(format!("cannot open {}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file, has_header)
    }

    pub fn from_csv_reader<R: Read>(reader: R, has_header: Option<bool>) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).flexible(false).trim(csv::Trim::All).from_reader(reader);
        let mut records = Vec::new();
        for rec in rdr.records() {
            records.push(rec.map_err(|e| Error::Ingestion(format!("malformed CSV: {e}")))?);
        }
        if records.is_empty() {
            return Err(Error::Ingestion("CSV file is empty".into()));
        }
        let header = match has_header {
            Some(h) => h,
            None => records[0].iter().any(|f| f.parse::<f64>().is_err()),
        };
        let names: Option<Vec<String>> = header.then(|| records[0].iter().map(str::to_string).collect());
        let body = if header { &records[1..] } else { &records[..] };
        let m = records[0].len();
        let mut columns = vec![Vec::with_capacity(body.len()); m];
        for (line, rec) in body.iter().enumerate() {
            for (col, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Ingestion(format!(
                        "row {}, column {}: '{field}' is not a number",
                        line + 1 + usize::from(header),
                        col + 1
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::Ingestion(format!(
                        "row {}, column {}: missing or non-finite value",
                        line + 1 + usize::from(header),
                        col + 1
                    )));
                }
                columns[col].push(v);
            }
        }
        let out = Self::from_rows(columns).map_err(|e| Error::Ingestion(e.to_string()))?;
        match names {
            Some(n) => out.with_names(n),
            None => Ok(out),
        }
    }

    /// Writes the matrix as CSV (one column per variable, header row first).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<String> = match &self.names {
            Some(n) => n.clone(),
            None => (1..=self.n_vars()).map(|i| format!("z{i}")).collect(),
        };
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        wtr.write_record(&header).map_err(io)?;
        for t in 0..self.len() {
            let rec: Vec<String> = (0..self.n_vars()).map(|i| format!("{:e}", self.data[[i, t]])).collect();
            wtr.write_record(&rec).map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Borrowed rows of the x, y and w blocks of a [`Partition`].
#[derive(Debug, Clone)]
pub struct PartitionRows<'a> {
    pub x: Vec<&'a [f64]>,
    pub y: Vec<&'a [f64]>,
    pub w: Vec<&'a [f64]>,
}

/// Splits the rows of a series matrix into a `k`-variate block X, an
/// `l`-variate block Y and an optional `c`-variate conditioning block W.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub x_rows: Vec<usize>,
    pub y_rows: Vec<usize>,
    #[serde(default)]
    pub w_rows: Vec<usize>,
}

impl Partition {
    pub fn new(x_rows: Vec<usize>, y_rows: Vec<usize>, w_rows: Vec<usize>) -> Self {
        Self { x_rows, y_rows, w_rows }
    }

    /// Consecutive layout used by the simulator: `k` x rows, then `l` y rows,
    /// then `c` w rows.
    pub fn contiguous(k: usize, l: usize, c: usize) -> Self {
        Self { x_rows: (0..k).collect(), y_rows: (k..k + l).collect(), w_rows: (k + l..k + l + c).collect() }
    }

    pub fn k(&self) -> usize {
        self.x_rows.len()
    }

    pub fn l(&self) -> usize {
        self.y_rows.len()
    }

    pub fn c(&self) -> usize {
        self.w_rows.len()
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.x_rows.is_empty() || self.y_rows.is_empty() {
            return Err(Error::Config("partition needs at least one x and one y row".into()));
        }
        let mut seen = HashSet::new();
        for &i in self.x_rows.iter().chain(&self.y_rows).chain(&self.w_rows) {
            if i >= m {
                return Err(Error::Config(format!("row {i} out of range for {m} variables")));
            }
            if !seen.insert(i) {
                return Err(Error::Config(format!("row {i} appears in more than one block")));
            }
        }
        Ok(())
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Subtracts the sample mean. Constant rows map to exact zeros.
pub fn demean_row(x: &[f64]) -> Vec<f64> {
    if x.iter().all(|&v| v == x[0]) {
        return vec![0.0; x.len()];
    }
    let mu = mean(x);
    let mut out: Vec<f64> = x.iter().map(|v| v - mu).collect();
    // second pass removes the rounding residue of the first
    let mu2 = mean(&out);
    out.iter_mut().for_each(|v| *v -= mu2);
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    // independent partial sums let the compiler vectorize the loop
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Sample cross-covariance `N^-1 sum_t a(t) b(t+u)` with `N = T - 1`, summed
/// over the overlap of valid indices. Rows are expected to be demeaned.
pub fn sample_cross_covariance(a: &[f64], b: &[f64], lag: i64) -> Result<f64> {
    let t = a.len();
    if b.len() != t {
        return Err(Error::InvalidInput(format!("rows have different lengths ({t} vs {})", b.len())));
    }
    if t < 2 || lag.unsigned_abs() as usize >= t {
        return Err(Error::LagOutOfRange { lag, len: t });
    }
    let u = lag.unsigned_abs() as usize;
    let s = if lag >= 0 { dot(&a[..t - u], &b[u..]) } else { dot(&a[u..], &b[..t - u]) };
    Ok(s / (t - 1) as f64)
}

/// Lag window applied to sample autocorrelations before they enter the
/// Bartlett variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagWindow {
    #[default]
    None,
    Tukey,
    Parzen,
}

impl LagWindow {
    /// Weight at lag `u` for truncation point `truncation`.
    pub fn weight(self, u: usize, truncation: usize) -> f64 {
        if u > truncation {
            return 0.0;
        }
        let z = u as f64 / truncation.max(1) as f64;
        match self {
            LagWindow::None => 1.0,
            LagWindow::Tukey => 0.5 * (1.0 + (std::f64::consts::PI * z).cos()),
            LagWindow::Parzen => {
                if z <= 0.5 {
                    1.0 - 6.0 * z * z + 6.0 * z * z * z
                } else {
                    2.0 * (1.0 - z).powi(3)
                }
            }
        }
    }
}

/// Where the autocorrelation sum is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// `U = T - 1`.
    #[default]
    Full,
    /// `U = T / 4`.
    Quarter,
    /// `U = T / 5`.
    Fifth,
    /// `U = sqrt(T)`.
    Sqrt,
    /// `U = 2 sqrt(T)`.
    TwoSqrt,
    Lags(usize),
}

impl Truncation {
    pub fn resolve(self, t: usize) -> usize {
        let tf = t as f64;
        let u = match self {
            Truncation::Full => t.saturating_sub(1),
            Truncation::Quarter => t / 4,
            Truncation::Fifth => t / 5,
            Truncation::Sqrt => tf.sqrt().floor() as usize,
            Truncation::TwoSqrt => (2.0 * tf.sqrt()).floor() as usize,
            Truncation::Lags(u) => u,
        };
        u.clamp(1, t.saturating_sub(1).max(1))
    }
}

/// Lag window plus truncation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaperSpec {
    #[serde(default)]
    pub window: LagWindow,
    #[serde(default)]
    pub truncation: Truncation,
}

impl TaperSpec {
    /// Untapered sum over every lag.
    pub fn none() -> Self {
        Self::default()
    }

    /// Tukey window truncated at `2 sqrt(T)`.
    pub fn tukey_two_sqrt() -> Self {
        Self { window: LagWindow::Tukey, truncation: Truncation::TwoSqrt }
    }
}

/// Sample autocorrelations `r(0..=U)` of one series.
///
/// `values` holds the raw estimates `c(u)/c(0)`; the lag window is kept as
/// metadata and applied once when the Bartlett sum is formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfEstimate {
    pub values: Vec<f64>,
    pub window: LagWindow,
    pub truncation: usize,
    pub series_length: usize,
}

impl AcfEstimate {
    pub fn weight(&self, u: usize) -> f64 {
        self.window.weight(u, self.truncation)
    }

    /// `lambda(u) r(u)` for every lag.
    pub fn tapered_values(&self) -> Vec<f64> {
        self.values.iter().enumerate().map(|(u, r)| self.weight(u) * r).collect()
    }
}

/// Lag-`u` autocovariance sums `sum_t a(t) a(t+u)` for `u = 0..=max_lag`.
fn autocovariance_sums(a: &[f64], max_lag: usize) -> Vec<f64> {
    let t = a.len();
    if t * (max_lag + 1) <= 1 << 16 {
        return (0..=max_lag).map(|u| dot(&a[..t - u], &a[u..])).collect();
    }
    autocovariance_sums_fft(a, max_lag)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

fn autocovariance_sums_fft(a: &[f64], max_lag: usize) -> Vec<f64> {
    let n = (a.len() + max_lag + 1).next_power_of_two();
    let (fwd, inv) = fft_pair(n);
    let mut buf: Vec<Complex<f64>> =
        a.iter().map(|&v| Complex::new(v, 0.0)).chain(std::iter::repeat(Complex::new(0.0, 0.0))).take(n).collect();
    fwd.process(&mut buf);
    buf.iter_mut().for_each(|z| *z = Complex::new(z.norm_sqr(), 0.0));
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf[..=max_lag].iter().map(|z| z.re * scale).collect()
}

/// Sample autocorrelation of a demeaned row up to lag `max_lag`.
pub fn sample_autocorrelation(a: &[f64], max_lag: usize, window: LagWindow) -> Result<AcfEstimate> {
    let t = a.len();
    if t < 2 {
        return Err(Error::InvalidInput("autocorrelation needs at least 2 samples".into()));
    }
    if max_lag >= t {
        return Err(Error::LagOutOfRange { lag: max_lag as i64, len: t });
    }
    let sums = autocovariance_sums(a, max_lag);
    let c0 = sums[0];
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let mut values: Vec<f64> = sums.iter().map(|s| s / c0).collect();
    values[0] = 1.0;
    Ok(AcfEstimate { values, window, truncation: max_lag, series_length: t })
}

/// Autocorrelation with the truncation point taken from a [`TaperSpec`].
pub fn autocorrelation_for(a: &[f64], taper: &TaperSpec) -> Result<AcfEstimate> {
    sample_autocorrelation(a, taper.truncation.resolve(a.len()), taper.window)
}

/// Backshifted copies of `rows`, lags `1..=p`, aligned to target times
/// `p + shift .. T`.
///
/// Output rows are variable-major, lag-minor: variable g at lags 1..p, then
/// variable g+1. With `p = 0` the result has no rows and `T - shift` columns.
pub fn lag_embed(rows: &[&[f64]], p: usize, shift: usize) -> Result<Array2<f64>> {
    let t = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != t) {
        return Err(Error::InvalidInput("rows have different lengths".into()));
    }
    let start = p + shift;
    if start >= t {
        return Err(Error::LagOutOfRange { lag: start as i64, len: t });
    }
    let cols = t - start;
    let mut out = Array2::zeros((rows.len() * p, cols));
    for (g, row) in rows.iter().enumerate() {
        for lag in 1..=p {
            let src = &row[start - lag..t - lag];
            out.row_mut(g * p + lag - 1).iter_mut().zip(src).for_each(|(o, v)| *o = *v);
        }
    }
    Ok(out)
}

/// [`lag_embed`] over the listed rows of a series matrix.
pub fn lag_embed_series(series: &TimeSeriesMatrix, rows: &[usize], p: usize, shift: usize) -> Result<Array2<f64>> {
    if let Some(&bad) = rows.iter().find(|&&i| i >= series.n_vars()) {
        return Err(Error::InvalidInput(format!("row {bad} out of range")));
    }
    let picked: Vec<&[f64]> = rows.iter().map(|&i| series.row(i)).collect();
    if picked.is_empty() {
        let start = p + shift;
        if start >= series.len() {
            return Err(Error::LagOutOfRange { lag: start as i64, len: series.len() });
        }
        return Ok(Array2::zeros((0, series.len() - start)));
    }
    lag_embed(&picked, p, shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n + 500 {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + e;
            if i >= 500 {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn demean_examples() {
        assert_eq!(demean_row(&[1.0, 1.0, 1.0, 1.0]), vec![0.0; 4]);
        assert_eq!(demean_row(&[1.0, 2.0, 3.0]), vec![-1.0, 0.0, 1.0]);
        let x = [0.3, -1.7, 2.2, 9.1, 0.0];
        let once = demean_row(&x);
        let twice = demean_row(&once);
        for (a, b) in once.iter().zip(&twice) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn matrix_rejects_bad_input() {
        assert!(TimeSeriesMatrix::from_rows(vec![vec![1.0]]).is_err());
        assert!(TimeSeriesMatrix::from_rows(vec![vec![1.0, f64::NAN]]).is_err());
        assert!(TimeSeriesMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(TimeSeriesMatrix::from_rows(vec![]).is_err());
    }

    #[test]
    fn cross_covariance_examples() {
        let a = [-1.0, 0.0, 1.0];
        let b = [1.0, 0.0, -1.0];
        assert_abs_diff_eq!(sample_cross_covariance(&a, &a, 0).unwrap(), 1.0);
        assert_abs_diff_eq!(sample_cross_covariance(&a, &b, 0).unwrap(), -1.0);
        assert!(matches!(sample_cross_covariance(&a, &b, 3), Err(Error::LagOutOfRange { .. })));
    }

    #[test]
    fn cross_covariance_recovers_ar1_coefficient() {
        let x = demean_row(&ar1(0.3, 100_000, 7));
        let r1 = sample_cross_covariance(&x, &x, 1).unwrap() / sample_cross_covariance(&x, &x, 0).unwrap();
        assert!((r1 - 0.3).abs() < 0.01, "r1 = {r1}");
    }

    #[test]
    fn autocorrelation_of_white_noise_and_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 2000;
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let acf = sample_autocorrelation(&demean_row(&x), 20, LagWindow::None).unwrap();
        assert_eq!(acf.values[0], 1.0);
        let bound = 2.0 / (n as f64).sqrt();
        let outside = acf.values[1..].iter().filter(|r| r.abs() > bound).count();
        assert!(outside <= 3, "{outside} of 20 lags outside the +-2/sqrt(T) band");

        let constant = demean_row(&[4.0; 10]);
        assert!(matches!(sample_autocorrelation(&constant, 3, LagWindow::None), Err(Error::Degenerate(_))));
    }

    #[test]
    fn autocorrelation_recovers_negative_ar1() {
        let x = demean_row(&ar1(-0.8, 100_000, 11));
        let acf = sample_autocorrelation(&x, 5, LagWindow::None).unwrap();
        assert!((acf.values[1] + 0.8).abs() < 0.01, "r1 = {}", acf.values[1]);
    }

    #[test]
    fn fft_and_direct_autocovariances_agree() {
        let x = demean_row(&ar1(0.6, 3000, 5));
        let direct: Vec<f64> = (0..=2999).map(|u| dot(&x[..3000 - u], &x[u..])).collect();
        let fft = autocovariance_sums_fft(&x, 2999);
        for (d, f) in direct.iter().zip(&fft) {
            assert_abs_diff_eq!(d, f, epsilon = 1e-9 * direct[0]);
        }
    }

    #[test]
    fn lag_windows() {
        assert_eq!(LagWindow::Tukey.weight(0, 10), 1.0);
        assert_abs_diff_eq!(LagWindow::Tukey.weight(10, 10), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(LagWindow::Parzen.weight(5, 10), 0.25);
        assert_eq!(LagWindow::Parzen.weight(11, 10), 0.0);
        assert_eq!(Truncation::Full.resolve(512), 511);
        assert_eq!(Truncation::Quarter.resolve(512), 128);
        assert_eq!(Truncation::Fifth.resolve(512), 102);
        assert_eq!(Truncation::Sqrt.resolve(512), 22);
        assert_eq!(Truncation::TwoSqrt.resolve(512), 45);
    }

    #[test]
    fn lag_embed_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let e0 = lag_embed(&[&x], 0, 0).unwrap();
        assert_eq!(e0.dim(), (0, 4));
        let e0s = lag_embed(&[&x], 0, 2).unwrap();
        assert_eq!(e0s.dim(), (0, 2));

        let e1 = lag_embed(&[&x], 1, 0).unwrap();
        assert_eq!(e1.row(0).to_vec(), vec![1.0, 2.0, 3.0]);

        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let e2 = lag_embed(&[&y], 2, 0).unwrap();
        assert_eq!(e2.row(0).to_vec(), vec![2.0, 3.0, 4.0]);
        assert_eq!(e2.row(1).to_vec(), vec![1.0, 2.0, 3.0]);

        assert!(lag_embed(&[&x], 2, 2).is_err());
    }

    #[test]
    fn lag_embed_is_variable_major() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [10.0, 20.0, 30.0, 40.0, 50.0];
        let e = lag_embed(&[&a, &b], 2, 1).unwrap();
        // target times 3..5
        assert_eq!(e.dim(), (4, 2));
        assert_eq!(e.row(0).to_vec(), vec![3.0, 4.0]);
        assert_eq!(e.row(1).to_vec(), vec![2.0, 3.0]);
        assert_eq!(e.row(2).to_vec(), vec![30.0, 40.0]);
        assert_eq!(e.row(3).to_vec(), vec![20.0, 30.0]);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = "a,b\n1,2\n3,4\n5,6\n";
        let m = TimeSeriesMatrix::from_csv_reader(text.as_bytes(), None).unwrap();
        assert_eq!(m.n_vars(), 2);
        assert_eq!(m.row(1), &[2.0, 4.0, 6.0]);
        assert_eq!(m.names().unwrap(), &["a".to_string(), "b".to_string()]);

        let headerless = TimeSeriesMatrix::from_csv_reader("1,2\n3,4\n".as_bytes(), None).unwrap();
        assert_eq!(headerless.row(0), &[1.0, 3.0]);

        let nan = TimeSeriesMatrix::from_csv_reader("a\n1\nNaN\n3\n".as_bytes(), None);
        assert!(matches!(nan, Err(Error::Ingestion(_))));
        let missing = TimeSeriesMatrix::from_csv_reader("a,b\n1,2\n3,\n".as_bytes(), None);
        assert!(matches!(missing, Err(Error::Ingestion(_))));

        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = TimeSeriesMatrix::from_csv_reader(buf.as_slice(), None).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0], vec![1], vec![]).validate(2).is_ok());
        assert!(Partition::new(vec![0], vec![0], vec![]).validate(2).is_err());
        assert!(Partition::new(vec![0], vec![], vec![]).validate(2).is_err());
        assert!(Partition::new(vec![0], vec![2], vec![]).validate(2).is_err());
    }

    proptest! {
        #[test]
        fn cross_covariance_is_symmetric_in_lag(
            a in proptest::collection::vec(-10.0f64..10.0, 12),
            b in proptest::collection::vec(-10.0f64..10.0, 12),
            lag in -11i64..=11,
        ) {
            let l = sample_cross_covariance(&a, &b, lag).unwrap();
            let r = sample_cross_covariance(&b, &a, -lag).unwrap();
            prop_assert!((l - r).abs() <= 1e-12 * (1.0 + l.abs()));
        }

        #[test]
        fn untapered_autocorrelation_is_bounded(
            a in proptest::collection::vec(-10.0f64..10.0, 3..60),
        ) {
            let d = demean_row(&a);
            if let Ok(acf) = sample_autocorrelation(&d, d.len() - 1, LagWindow::None) {
                prop_assert_eq!(acf.values[0], 1.0);
                for r in &acf.values {
                    prop_assert!(r.abs() <= 1.0 + 1e-12);
                }
            }
        }

        #[test]
        fn lag_embed_column_count(p in 1usize..5, shift in 0usize..5) {
            let x: Vec<f64> = (0..20).map(f64::from).collect();
            let e = lag_embed(&[&x], p, shift).unwrap();
            prop_assert_eq!(e.ncols(), 20 - p - shift);
        }
    }
}
