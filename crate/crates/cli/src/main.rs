//! `lindep` command-line tool.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lindep::harness::{
    ingest_and_test, run_experiment, sweep, sweep_summary_csv, write_experiment_outputs, BandPass, ExperimentConfig,
    ExperimentReport, History, Measure, Preprocessing, SweepVariable,
};
use lindep::measures::MeasureOptions;
use lindep::nulldist::NullFamily;
use lindep::series::{LagWindow, Partition, TaperSpec, TimeSeriesMatrix, Truncation};
use lindep::simulate::{filter_apply, var_simulate};
use lindep::Error;
use serde_json::Value;

#[derive(Parser)]
#[command(
    name = "lindep",
    version,
    about = "Autocorrelation-corrected tests for linear dependence between time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured VAR(1) process (filtered) and write it as CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Preprocess a CSV file and test one dependence measure on it.
    Test(TestArgs),
    /// Run a Monte-Carlo experiment.
    Experiment {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run an experiment at every point of a grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// filter_order, cond_dim, dimension, history_q or sample_size; defaults to the config's sweep.
        #[arg(long)]
        variable: Option<String>,
        /// Comma-separated grid values; defaults to the config's sweep.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment configuration; defaults are used for missing fields.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set filter.order=8` or
    /// `--set tests='["lambda_star"]'`. Values are parsed as JSON, falling
    /// back to a string.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(short, long, default_value = "lindep-out")]
    out: PathBuf,
    /// Also write fpr_curve.svg.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct TestArgs {
    /// CSV file with one column per variable.
    csv: PathBuf,
    /// pearson_mi, cond_mi, multivar_mi, gc or multivar_gc.
    #[arg(long, default_value = "pearson_mi")]
    measure: String,
    /// Columns of the x block (indices from 0 or header names).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    x: Vec<String>,
    /// Columns of the y block.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    y: Vec<String>,
    /// Columns of the conditioning block.
    #[arg(long, value_delimiter = ',')]
    w: Vec<String>,
    /// Own history length for Granger causality (Burg-selected if omitted).
    #[arg(long)]
    p: Option<usize>,
    /// Source history length for Granger causality (Burg-selected if omitted).
    #[arg(long)]
    q: Option<usize>,
    /// Take first differences before anything else.
    #[arg(long)]
    difference: bool,
    /// Remove a least-squares line from each column.
    #[arg(long)]
    detrend: bool,
    /// Zero-phase band-pass edges as fractions of Nyquist, e.g. `0.02,0.1`.
    #[arg(long, value_delimiter = ',', value_name = "LOW,HIGH")]
    bandpass: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3)]
    bandpass_order: usize,
    /// Samples removed from each end after filtering.
    #[arg(long, default_value_t = 200)]
    trim: usize,
    /// Null families: t, f, chi2, lambda_star.
    #[arg(long, value_delimiter = ',')]
    tests: Option<Vec<String>>,
    #[arg(long, default_value_t = lindep::nulldist::DEFAULT_NULL_SAMPLES)]
    null_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lag window for the effective sample size: none, tukey or parzen.
    #[arg(long, default_value = "none")]
    window: String,
    /// Truncation: full, quarter, fifth, sqrt, two_sqrt or a lag count.
    #[arg(long, default_value = "full")]
    truncation: String,
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> lindep::Result<T> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| Error::Config(format!("unknown {what} {s:?}")))
}

/// Sets the dotted `path` inside `root` to `value`.
fn set_path(root: &mut Value, path: &str, value: Value) -> lindep::Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        if key.is_empty() {
            return Err(Error::Config(format!("malformed override path {path:?}")));
        }
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        let obj =
            cur.as_object_mut().ok_or_else(|| Error::Config(format!("{path:?}: {key:?} is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

/// The configuration with overrides applied, not yet validated.
fn parse_config(args: &ConfigArgs) -> lindep::Result<ExperimentConfig> {
    let base = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    let mut value = serde_json::to_value(base).map_err(|e| Error::Config(e.to_string()))?;
    for o in &args.overrides {
        let (path, raw) =
            o.split_once('=').ok_or_else(|| Error::Config(format!("override {o:?} is not PATH=VALUE")))?;
        let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut value, path.trim(), v)?;
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid configuration: {e}")))
}

fn load_config(args: &ConfigArgs) -> lindep::Result<ExperimentConfig> {
    let cfg = parse_config(args)?;
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(out: &mut impl Write, label: &str, r: &ExperimentReport) -> io::Result<()> {
    writeln!(out, "{label}: {} trials, {} evaluated, {} dropped", r.trials, r.evaluated, r.dropped.len())?;
    for (kind, n) in &r.drop_counts {
        writeln!(out, "  dropped ({kind}): {n}")?;
    }
    for (fam, s) in &r.families {
        writeln!(
            out,
            "  {:<12} rate {:.4}  95% CI [{:.4}, {:.4}]  KS p {:.3}",
            fam.label(),
            s.fpr,
            s.ci_low,
            s.ci_high,
            s.ks_pvalue
        )?;
    }
    Ok(())
}

fn simulate_cmd(config: &ConfigArgs, out: Option<&Path>) -> lindep::Result<()> {
    // the measure plays no part here, so its dimension rules are not checked
    let cfg = parse_config(config)?;
    let spec = lindep::simulate::VarSpec { length: cfg.length, ..cfg.var.clone() };
    let z = filter_apply(&var_simulate(&spec, cfg.seed)?, &cfg.filter)?;
    let names: Vec<String> = (0..spec.k)
        .map(|i| format!("x{}", i + 1))
        .chain((0..spec.l).map(|i| format!("y{}", i + 1)))
        .chain((0..spec.c).map(|i| format!("w{}", i + 1)))
        .collect();
    let z = z.with_names(names)?;
    match out {
        Some(path) => z.write_csv(fs::File::create(path)?),
        None => z.write_csv(io::stdout().lock()),
    }
}

fn resolve_columns(spec: &[String], names: Option<&[String]>) -> lindep::Result<Vec<usize>> {
    spec.iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let s = s.trim();
            if let Ok(i) = s.parse::<usize>() {
                return Ok(i);
            }
            names
                .and_then(|n| n.iter().position(|c| c == s))
                .ok_or_else(|| Error::Config(format!("no column named {s:?}")))
        })
        .collect()
}

fn test_cmd(a: &TestArgs) -> lindep::Result<()> {
    let measure: Measure = parse_enum("measure", &a.measure)?;
    let header = TimeSeriesMatrix::from_csv_path(&a.csv, None)?;
    let names = header.names();
    let partition =
        Partition::new(resolve_columns(&a.x, names)?, resolve_columns(&a.y, names)?, resolve_columns(&a.w, names)?);
    let tests = match &a.tests {
        Some(t) => t.iter().map(|s| NullFamily::parse(s.trim())).collect::<lindep::Result<Vec<_>>>()?,
        None => NullFamily::ALL.to_vec(),
    };
    let truncation = match a.truncation.parse::<usize>() {
        Ok(u) => Truncation::Lags(u),
        Err(_) => parse_enum::<Truncation>("truncation", &a.truncation)?,
    };
    let taper = TaperSpec { window: parse_enum::<LagWindow>("window", &a.window)?, truncation };
    let opts = MeasureOptions { taper, null_samples: a.null_samples, seed: a.seed, tests };
    let bandpass = match a.bandpass.as_deref() {
        None => None,
        Some(&[low, high]) => Some(BandPass { low, high, order: a.bandpass_order }),
        Some(_) => return Err(Error::Config("--bandpass takes two edges, LOW,HIGH".into())),
    };
    let pre = Preprocessing { difference: a.difference, detrend: a.detrend, bandpass, trim: a.trim };
    let history = History { p: a.p, q: a.q, max_order: None };
    let result = ingest_and_test(&a.csv, &partition, &pre, measure, &history, &opts)?;
    let json = serde_json::to_string_pretty(&result).map_err(|e| Error::Io(e.into()))?;
    println!("{json}");
    Ok(())
}

fn experiment_cmd(config: &ConfigArgs, output: &OutputArgs) -> lindep::Result<()> {
    let cfg = load_config(config)?;
    let report = run_experiment(&cfg)?;
    write_experiment_outputs(&report, &output.out, output.svg)?;
    print_summary(&mut io::stdout().lock(), "experiment", &report)?;
    Ok(())
}

fn sweep_cmd(
    config: &ConfigArgs,
    variable: Option<&str>,
    grid: Option<&[usize]>,
    output: &OutputArgs,
) -> lindep::Result<()> {
    let cfg = load_config(config)?;
    let variable =
        match variable {
            Some(v) => SweepVariable::parse(v)?,
            None => cfg.sweep.as_ref().map(|s| s.variable).ok_or_else(|| {
                Error::Config("no sweep variable: pass --variable or set `sweep` in the config".into())
            })?,
        };
    let grid: Vec<usize> = match grid {
        Some(g) => g.to_vec(),
        None => cfg.sweep.as_ref().map(|s| s.grid.clone()).unwrap_or_default(),
    };
    let reports = sweep(&cfg, variable, &grid)?;
    fs::create_dir_all(&output.out)?;
    let mut stdout = io::stdout().lock();
    for (r, v) in reports.iter().zip(&grid) {
        write_experiment_outputs(r, output.out.join(format!("point_{:03}_{v}", r.grid_index)), output.svg)?;
        print_summary(&mut stdout, &format!("grid value {v}"), r)?;
    }
    sweep_summary_csv(&reports, variable, &grid, fs::File::create(output.out.join("sweep_summary.csv"))?)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Ingestion(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out } => simulate_cmd(config, out.as_deref()),
        Command::Test(args) => test_cmd(args),
        Command::Experiment { config, output } => experiment_cmd(config, output),
        Command::Sweep { config, variable, grid, output } => {
            sweep_cmd(config, variable.as_deref(), grid.as_deref(), output)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
