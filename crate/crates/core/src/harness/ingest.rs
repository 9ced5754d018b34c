use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{evaluate, History, Measure};
use crate::error::{Error, Result};
use crate::measures::{DependenceResult, MeasureOptions};
use crate::series::{demean_row, Partition, TimeSeriesMatrix};
use crate::simulate::{butterworth_bandpass, filtfilt_row, DesignedFilter};

/// Shortest series accepted after trimming.
pub const MIN_INGEST_LENGTH: usize = 64;

/// Zero-phase Butterworth band-pass; edges are fractions of the Nyquist
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPass {
    pub low: f64,
    pub high: f64,
    #[serde(default = "default_bandpass_order")]
    pub order: usize,
}

fn default_bandpass_order() -> usize {
    3
}

/// Steps applied to ingested series, in order: optional first difference,
/// demean, optional linear detrend, optional zero-phase band-pass, then
/// trimming of `trim` samples from each end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    #[serde(default)]
    pub difference: bool,
    #[serde(default)]
    pub detrend: bool,
    #[serde(default)]
    pub bandpass: Option<BandPass>,
    #[serde(default = "default_trim")]
    pub trim: usize,
}

fn default_trim() -> usize {
    200
}

impl Default for Preprocessing {
    fn default() -> Self {
        Self { difference: false, detrend: false, bandpass: None, trim: default_trim() }
    }
}

/// Removes the least-squares line from a row.
pub fn detrend_row(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let tm = (n - 1.0) / 2.0;
    let xm = x.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let dt = i as f64 - tm;
        sxy += dt * (v - xm);
        sxx += dt * dt;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    x.iter().enumerate().map(|(i, v)| v - xm - slope * (i as f64 - tm)).collect()
}

pub fn preprocess(series: &TimeSeriesMatrix, pre: &Preprocessing) -> Result<TimeSeriesMatrix> {
    let differenced;
    let series = if pre.difference {
        differenced = series.first_difference().map_err(|e| Error::Ingestion(e.to_string()))?;
        &differenced
    } else {
        series
    };
    let t = series.len();
    if t < 2 * pre.trim + MIN_INGEST_LENGTH {
        return Err(Error::Ingestion(format!(
            "{t} samples leave fewer than {MIN_INGEST_LENGTH} after trimming {} from each end",
            pre.trim
        )));
    }
    let filter = match pre.bandpass {
        Some(b) => {
            if !(b.low > 0.0 && b.low < b.high && b.high < 1.0) {
                return Err(Error::Config(format!(
                    "band-pass edges must satisfy 0 < low < high < 1 (fractions of Nyquist), got {} and {}",
                    b.low, b.high
                )));
            }
            Some(DesignedFilter::Sos(butterworth_bandpass(b.order, b.low * PI, b.high * PI)?))
        }
        None => None,
    };
    let out = series.map_rows(|r| {
        let mut v = demean_row(r);
        if pre.detrend {
            v = detrend_row(&v);
        }
        if let Some(f) = &filter {
            v = filtfilt_row(f, &v);
        }
        v
    })?;
    out.slice_time(pre.trim, t - pre.trim)
}

/// Reads a CSV (one column per variable), preprocesses it and evaluates
/// `measure` with the tests in `opts`.
pub fn ingest_and_test(
    path: impl AsRef<Path>,
    partition: &Partition,
    pre: &Preprocessing,
    measure: Measure,
    history: &History,
    opts: &MeasureOptions,
) -> Result<DependenceResult> {
    let series = TimeSeriesMatrix::from_csv_path(path, None)?;
    partition.validate(series.n_vars())?;
    measure.check_dims(partition.k(), partition.l(), partition.c())?;
    let clean = preprocess(&series, pre)?;
    evaluate(measure, &clean, partition, history, opts)
}
