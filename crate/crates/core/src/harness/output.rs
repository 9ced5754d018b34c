use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ExperimentReport, SweepVariable};
use crate::error::{Error, Result};
use crate::nulldist::NullFamily;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(e.into())
}

fn families(report: &ExperimentReport) -> Vec<NullFamily> {
    report.families.keys().copied().collect()
}

/// One row per trial, one column per family; dropped trials keep their row
/// with empty p-values and the drop reason. A trial that lost only some
/// families keeps its other p-values.
pub fn pvalues_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let fams = families(report);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["trial".to_string()];
    header.extend(fams.iter().map(|f| f.label().to_string()));
    header.push("dropped".into());
    w.write_record(&header).map_err(csv_err)?;
    let mut ok = report.pvalues.iter().peekable();
    let mut bad = report.dropped.iter().peekable();
    for trial in 0..report.trials {
        let mut rec = vec![trial.to_string()];
        match ok.next_if(|t| t.trial == trial) {
            Some(t) => rec.extend(fams.iter().map(|f| t.values.get(f).map(|p| p.to_string()).unwrap_or_default())),
            None => rec.extend(fams.iter().map(|_| String::new())),
        }
        rec.push(bad.next_if(|d| d.trial == trial).map(|d| d.reason.clone()).unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    Ok(w.flush()?)
}

/// Rejection rate against alpha for every family.
pub fn fpr_curve_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let fams = families(report);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["alpha".to_string()];
    header.extend(fams.iter().map(|f| f.label().to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, a) in report.alpha_sweep.alphas.iter().enumerate() {
        let mut rec = vec![a.to_string()];
        rec.extend(fams.iter().map(|f| report.alpha_sweep.fpr[f][i].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    Ok(w.flush()?)
}

/// Rejection rate at the configured alpha per grid point and family.
pub fn sweep_summary_csv<W: Write>(
    reports: &[ExperimentReport],
    variable: SweepVariable,
    grid: &[usize],
    writer: W,
) -> Result<()> {
    let var = serde_json::to_value(variable).map_err(json_err)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([var.as_str().unwrap_or("value"), "family", "fpr", "ci_low", "ci_high", "evaluated", "dropped"])
        .map_err(csv_err)?;
    for (r, v) in reports.iter().zip(grid) {
        for (f, s) in &r.families {
            w.write_record([
                v.to_string(),
                f.label().to_string(),
                s.fpr.to_string(),
                s.ci_low.to_string(),
                s.ci_high.to_string(),
                s.evaluated.to_string(),
                (r.trials - s.evaluated).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(w.flush()?)
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line plot of rejection rate against alpha with the diagonal for
/// reference.
pub fn fpr_curve_svg(report: &ExperimentReport) -> String {
    let (size, pad) = (400.0, 50.0);
    let sx = |a: f64| pad + a * size;
    let sy = |f: f64| pad + (1.0 - f) * size;
    let full = size + 2.0 * pad;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#,
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sy(1.0)
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{tick}</text>"#, sx(tick), sy(0.0) + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{tick}</text>"#, sx(0.0) - 6.0, sy(tick) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">alpha</text>"#, sx(0.5), full - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">rejection rate</text>"#,
        sy(0.5),
        sy(0.5)
    );
    for (i, (fam, curve)) in report.alpha_sweep.fpr.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = std::iter::once((0.0, 0.0))
            .chain(report.alpha_sweep.alphas.iter().copied().zip(curve.iter().copied()))
            .map(|(a, f)| format!("{:.2},{:.2}", sx(a), sy(f)))
            .collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let y = pad + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{y}" fill="{color}">{}</text>"#, pad + 10.0, fam.label());
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `report.json`, `pvalues.csv`, `fpr_curve.csv` and optionally
/// `fpr_curve.svg` into `dir`, creating it if needed.
pub fn write_experiment_outputs(report: &ExperimentReport, dir: impl AsRef<Path>, svg: bool) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(json_err)?;
    fs::write(dir.join("report.json"), json)?;
    pvalues_csv(report, fs::File::create(dir.join("pvalues.csv"))?)?;
    fpr_curve_csv(report, fs::File::create(dir.join("fpr_curve.csv"))?)?;
    if svg {
        fs::write(dir.join("fpr_curve.svg"), fpr_curve_svg(report))?;
    }
    Ok(())
}
