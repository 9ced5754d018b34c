//! Monte-Carlo experiment engine: simulate, filter, optionally prewhiten,
//! measure and test, then aggregate rejection rates per null family.

mod ingest;
mod output;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linreg::{burg_fit, default_max_order};
use crate::measures::{granger_causality, mi_gaussian, DependenceResult, MeasureOptions};
use crate::nulldist::{NullFamily, DEFAULT_NULL_SAMPLES, MIN_NULL_SAMPLES};
use crate::series::{Partition, TaperSpec, TimeSeriesMatrix};
use crate::simulate::{filter_row, prewhiten, var_simulate_with, DesignedFilter, FilterSpec, PrewhitenModel, VarSpec};
use crate::special::ks_uniform;

pub use ingest::{detrend_row, ingest_and_test, preprocess, BandPass, Preprocessing, MIN_INGEST_LENGTH};
pub use output::{fpr_curve_csv, fpr_curve_svg, pvalues_csv, sweep_summary_csv, write_experiment_outputs};

/// Which dependence measure an experiment evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// MI between two univariate series.
    #[default]
    PearsonMi,
    /// MI between two univariate series given w (c >= 1).
    CondMi,
    /// MI between multivariate blocks, optionally given w.
    MultivarMi,
    /// Granger causality from univariate y to univariate x.
    Gc,
    /// Granger causality between multivariate blocks.
    MultivarGc,
}

impl Measure {
    pub fn is_granger(self) -> bool {
        matches!(self, Measure::Gc | Measure::MultivarGc)
    }

    /// Checks the block sizes the measure expects.
    pub fn check_dims(self, k: usize, l: usize, c: usize) -> Result<()> {
        let ok = match self {
            Measure::PearsonMi => k == 1 && l == 1 && c == 0,
            Measure::CondMi => k == 1 && l == 1 && c >= 1,
            Measure::Gc => k == 1 && l == 1,
            Measure::MultivarMi | Measure::MultivarGc => k >= 1 && l >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("measure {self:?} does not accept k={k}, l={l}, c={c}")))
        }
    }
}

/// History lengths for Granger causality. A missing length is chosen per
/// call by Burg AR order selection (the largest order over the block's
/// rows, at least 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct History {
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub q: Option<usize>,
    /// Largest order Burg may select; defaults to `min(200, T/4)`.
    #[serde(default)]
    pub max_order: Option<usize>,
}

fn burg_order(rows: &[&[f64]], max_order: usize) -> Result<usize> {
    let mut best = 1;
    for r in rows {
        best = best.max(burg_fit(r, max_order)?.0);
    }
    Ok(best)
}

impl History {
    /// Resolves `(p, q)` for the given series and partition.
    pub fn resolve(&self, series: &TimeSeriesMatrix, partition: &Partition) -> Result<(usize, usize)> {
        let max = self.max_order.unwrap_or_else(|| default_max_order(series.len()));
        let rows = series.partition_rows(partition)?;
        let p = match self.p {
            Some(p) => p,
            None => burg_order(&rows.x, max)?,
        };
        let q = match self.q {
            Some(q) => q,
            None => burg_order(&rows.y, max)?,
        };
        Ok((p, q))
    }
}

/// Evaluates `measure` on `series`.
pub fn evaluate(
    measure: Measure,
    series: &TimeSeriesMatrix,
    partition: &Partition,
    history: &History,
    opts: &MeasureOptions,
) -> Result<DependenceResult> {
    measure.check_dims(partition.k(), partition.l(), partition.c())?;
    if measure.is_granger() {
        let (p, q) = history.resolve(series, partition)?;
        granger_causality(series, partition, p, q, opts)
    } else {
        mi_gaussian(series, partition, opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    FilterOrder,
    /// Dimension c of the conditioning block.
    CondDim,
    /// k = l.
    Dimension,
    HistoryQ,
    SampleSize,
}

impl SweepVariable {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown sweep variable {s:?}")))
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: usize) {
        match self {
            SweepVariable::FilterOrder => cfg.filter.order = value,
            SweepVariable::CondDim => cfg.var.c = value,
            SweepVariable::Dimension => {
                cfg.var.k = value;
                cfg.var.l = value;
            }
            SweepVariable::HistoryQ => cfg.history.q = Some(value),
            SweepVariable::SampleSize => cfg.length = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<usize>,
}

/// A full experiment description. `length` overrides `var.length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub measure: Measure,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default)]
    pub var: VarSpec,
    #[serde(default = "FilterSpec::identity")]
    pub filter: FilterSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_tests")]
    pub tests: Vec<NullFamily>,
    #[serde(default)]
    pub prewhitening: Option<PrewhitenModel>,
    #[serde(default)]
    pub history: History,
    #[serde(default = "default_null_samples")]
    pub null_samples: usize,
    #[serde(default)]
    pub taper: TaperSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_trials() -> usize {
    1000
}
fn default_length() -> usize {
    512
}
fn default_alpha() -> f64 {
    0.05
}
fn default_tests() -> Vec<NullFamily> {
    NullFamily::ALL.to_vec()
}
fn default_null_samples() -> usize {
    DEFAULT_NULL_SAMPLES
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.tests.is_empty() {
            return Err(Error::Config("no null families requested".into()));
        }
        if self.tests.contains(&NullFamily::LambdaStar) && self.null_samples < MIN_NULL_SAMPLES {
            return Err(Error::Config(format!("null_samples must be at least {MIN_NULL_SAMPLES}")));
        }
        self.var_spec().validate()?;
        self.measure.check_dims(self.var.k, self.var.l, self.var.c)?;
        self.filter.design()?;
        if self.prewhitening.is_some() && (self.var.k != 1 || self.var.l != 1 || self.var.c != 0) {
            return Err(Error::Config("prewhitening needs k = l = 1 and c = 0".into()));
        }
        if let Some(s) = &self.sweep {
            if s.grid.is_empty() {
                return Err(Error::Config("sweep grid is empty".into()));
            }
        }
        Ok(())
    }

    fn var_spec(&self) -> VarSpec {
        VarSpec { length: self.length, ..self.var.clone() }
    }

    /// The configuration at one sweep grid point (without the sweep).
    pub fn at_grid_point(&self, variable: SweepVariable, value: usize) -> Self {
        let mut cfg = self.clone();
        cfg.sweep = None;
        variable.apply(&mut cfg, value);
        cfg
    }
}

/// Rejection counts and interval for one null family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    /// Trials with a p-value for this family.
    pub evaluated: usize,
    pub significant: usize,
    /// Proportion of p-values at or below alpha (a false-positive rate
    /// under the null, a true-positive rate otherwise).
    pub fpr: f64,
    /// Normal-approximation 95% binomial interval, clipped to [0, 1].
    pub ci_low: f64,
    pub ci_high: f64,
    /// Kolmogorov-Smirnov distance of the p-values from Uniform(0, 1).
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub alphas: Vec<f64>,
    pub fpr: BTreeMap<NullFamily, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedTrial {
    pub trial: usize,
    /// Error kind, e.g. `fit_failed`.
    pub kind: String,
    pub reason: String,
    /// Set when only this family was dropped and the trial's other p-values
    /// were kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<NullFamily>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPValues {
    pub trial: usize,
    pub values: BTreeMap<NullFamily, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// The configuration this report was produced from.
    pub config: ExperimentConfig,
    pub grid_index: usize,
    pub trials: usize,
    /// Trials that produced at least one p-value.
    pub evaluated: usize,
    pub dropped: Vec<DroppedTrial>,
    /// Dropped-trial counts by error kind.
    pub drop_counts: BTreeMap<String, usize>,
    pub pvalues: Vec<TrialPValues>,
    pub families: BTreeMap<NullFamily, FamilySummary>,
    pub alpha_sweep: AlphaSweep,
}

impl ExperimentReport {
    pub fn fpr(&self, family: NullFamily) -> Option<f64> {
        self.families.get(&family).map(|s| s.fpr)
    }

    /// p-values of one family over the trials that produced one.
    pub fn family_pvalues(&self, family: NullFamily) -> Vec<f64> {
        self.pvalues.iter().filter_map(|t| t.values.get(&family).copied()).collect()
    }

    /// Fraction of alpha-grid points in `(0, 1)` where `|FPR(a) - a|` lies
    /// within `1.96 sqrt(a (1 - a) / n)`.
    pub fn diagonal_coverage(&self, family: NullFamily) -> Option<f64> {
        let n = self.families.get(&family)?.evaluated as f64;
        let curve = self.alpha_sweep.fpr.get(&family)?;
        let pts: Vec<(f64, f64)> =
            self.alpha_sweep.alphas.iter().zip(curve).filter(|(a, _)| **a < 1.0).map(|(a, f)| (*a, *f)).collect();
        let inside = pts.iter().filter(|(a, f)| (f - a).abs() <= 1.96 * (a * (1.0 - a) / n).sqrt()).count();
        Some(inside as f64 / pts.len() as f64)
    }
}

/// The 100-point alpha grid `0.01, 0.02, ..., 1.00`.
pub fn alpha_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

/// Normal-approximation binomial 95% interval for `successes / n`.
pub fn binomial_ci(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let p = successes as f64 / n as f64;
    let half = 1.96 * (p * (1.0 - p) / n as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one trial at one grid point.
pub fn trial_rng(seed: u64, grid_index: usize, trial: usize) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(splitmix64(seed) ^ grid_index as u64) ^ trial as u64);
    ChaCha8Rng::seed_from_u64(s)
}

type TrialOutcome = (BTreeMap<NullFamily, f64>, Option<Error>);

fn run_trial(
    cfg: &ExperimentConfig,
    filter: &DesignedFilter,
    partition: &Partition,
    grid_index: usize,
    trial: usize,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(cfg.seed, grid_index, trial);
    let mut z = var_simulate_with(&cfg.var_spec(), &mut rng)?;
    if *filter != DesignedFilter::Identity {
        z = z.map_rows(|r| filter_row(filter, r))?;
    }
    if let Some(model) = cfg.prewhitening {
        let pw = prewhiten(z.row(0), z.row(1), model)?;
        z = TimeSeriesMatrix::from_rows(vec![pw.x, pw.y])?;
    }
    let opts = MeasureOptions {
        taper: cfg.taper,
        null_samples: cfg.null_samples,
        seed: rng.random(),
        tests: cfg.tests.clone(),
    };
    let p_values = |r: DependenceResult| r.verdicts.iter().map(|(f, v)| (*f, v.p_value)).collect();
    match evaluate(cfg.measure, &z, partition, &cfg.history, &opts) {
        Ok(res) => Ok((p_values(res), None)),
        // Λ* is undefined but the classical tests are not; keep them so
        // their rates are not conditioned on the Λ* outcome
        Err(e @ Error::InsufficientEffectiveSamples { .. })
            if opts.tests.iter().any(|&f| f != NullFamily::LambdaStar) =>
        {
            let tests = opts.tests.iter().copied().filter(|&f| f != NullFamily::LambdaStar).collect();
            let res = evaluate(cfg.measure, &z, partition, &cfg.history, &MeasureOptions { tests, ..opts })?;
            Ok((p_values(res), Some(e)))
        }
        Err(e) => Err(e),
    }
}

fn run_point(cfg: &ExperimentConfig, grid_index: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let filter = cfg.filter.design()?;
    let partition = cfg.var.partition();
    let outcomes: Vec<Result<TrialOutcome>> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, &filter, &partition, grid_index, i)).collect();

    let mut pvalues = Vec::new();
    let mut dropped = Vec::new();
    let mut drop_counts = BTreeMap::new();
    for (trial, out) in outcomes.into_iter().enumerate() {
        let (values, err, family) = match out {
            Ok((values, err)) => (Some(values), err, Some(NullFamily::LambdaStar)),
            Err(e) => (None, Some(e), None),
        };
        if let Some(e) = err {
            *drop_counts.entry(e.kind().to_string()).or_insert(0) += 1;
            dropped.push(DroppedTrial { trial, kind: e.kind().to_string(), reason: e.to_string(), family });
        }
        if let Some(values) = values {
            pvalues.push(TrialPValues { trial, values });
        }
    }

    let alphas = alpha_grid();
    let mut families = BTreeMap::new();
    let mut curves = BTreeMap::new();
    for &family in &cfg.tests {
        let ps: Vec<f64> = pvalues.iter().filter_map(|t| t.values.get(&family).copied()).collect();
        if ps.is_empty() {
            continue;
        }
        let n = ps.len();
        let rate = |a: f64| ps.iter().filter(|&&p| p <= a).count();
        let significant = rate(cfg.alpha);
        let (ci_low, ci_high) = binomial_ci(significant, n);
        let (ks_statistic, ks_pvalue) = ks_uniform(&ps);
        families.insert(
            family,
            FamilySummary {
                evaluated: n,
                significant,
                fpr: significant as f64 / n as f64,
                ci_low,
                ci_high,
                ks_statistic,
                ks_pvalue,
            },
        );
        curves.insert(family, alphas.iter().map(|&a| rate(a) as f64 / n as f64).collect());
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        grid_index,
        trials: cfg.trials,
        evaluated: pvalues.len(),
        dropped,
        drop_counts,
        pvalues,
        families,
        alpha_sweep: AlphaSweep { alphas, fpr: curves },
    })
}

/// Runs `config.trials` independent trials (in parallel) and aggregates
/// rejection rates per null family. Trial failures are recorded as drops;
/// only an invalid configuration is an error. Any `sweep` field is ignored.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cfg = config.clone();
    cfg.sweep = None;
    run_point(&cfg, 0)
}

/// One report per grid value; trial streams depend on the grid index.
pub fn sweep(config: &ExperimentConfig, variable: SweepVariable, grid: &[usize]) -> Result<Vec<ExperimentReport>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let points: Vec<ExperimentConfig> = grid.iter().map(|&v| config.at_grid_point(variable, v)).collect();
    for p in &points {
        p.validate()?;
    }
    points.iter().enumerate().map(|(i, p)| run_point(p, i)).collect()
}
