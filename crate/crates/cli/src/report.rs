//! Report rendering: aligned text tables for the terminal, plus JSON and
//! CSV writers for the machine-readable outputs behind `--json`/`--csv`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::bench::BenchReport;
use crate::error::CliError;
use crate::experiment::{EvaluationReport, TuneReport};

const LABEL_W: usize = 20;
const COL_W: usize = 12;

/// Serializes any report as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn header_row(labels: &[&str]) -> String {
    let mut line = format!("{:<LABEL_W$}", labels[0]);
    for l in &labels[1..] {
        line.push_str(&format!("{l:>COL_W$}"));
    }
    line.push('\n');
    line
}

fn value_row(label: &str, values: &[f64]) -> String {
    let mut line = format!("{label:<LABEL_W$}");
    for v in values {
        line.push_str(&format!("{v:>COL_W$.4}"));
    }
    line.push('\n');
    line
}

/// Human-readable summary of an `evaluate` run.
pub fn evaluation_table(report: &EvaluationReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    out.push_str(&format!(
        "evaluation over targets [{}, {}) — {} replication(s), seed {}\n",
        c.t2, c.t_len, c.reps, c.seed
    ));
    out.push_str(&format!(
        "source: {} (k = {}, T = {}), p = {}, s = {}, grid = {}",
        c.source, c.k, c.t_len, c.p, c.s, c.grid_size
    ));
    if let Some(eta) = c.eta {
        out.push_str(&format!(", eta = {eta}"));
    }
    if c.normalized {
        out.push_str(", normalized");
    }
    out.push('\n');
    let mean_lambda = report.reps.iter().map(|r| r.lambda_selected).sum::<f64>()
        / report.reps.len().max(1) as f64;
    out.push_str(&format!(
        "validated penalty (mean over replications): {mean_lambda:.6}\n\n"
    ));
    out.push_str(&header_row(&["method", "mean MSFE", "rel. MSFE"]));
    for m in &report.methods {
        out.push_str(&value_row(m.method.label(), &[m.mean_msfe, m.relative_msfe]));
    }
    out
}

/// Human-readable summary of a `tune` run: the MSFE(λ) curve and winner.
pub fn tune_table(report: &TuneReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    out.push_str(&format!(
        "rolling validation over targets [{}, {}) — grid of {}, seed {}\n",
        c.t1, c.t2, c.grid_size, c.seed
    ));
    out.push_str(&format!(
        "source: {} (k = {}, T = {}), p = {}, s = {}\n\n",
        c.source, c.k, c.t_len, c.p, c.s
    ));
    out.push_str(&format!(
        "{:<6}{:>16}{:>COL_W$}\n",
        "index", "lambda", "MSFE"
    ));
    for (i, (lambda, msfe)) in report.grid.iter().zip(&report.msfe).enumerate() {
        let marker = if i == report.selected_index { " *" } else { "" };
        out.push_str(&format!(
            "{i:<6}{lambda:>16.8}{msfe:>COL_W$.4}{marker}\n"
        ));
    }
    out.push_str(&format!(
        "\nselected: lambda = {:.8} (index {})\n",
        report.selected_lambda, report.selected_index
    ));
    out
}

/// Human-readable timing table for a `bench` run.
pub fn bench_table(report: &BenchReport) -> String {
    let c = &report.config;
    let t = &report.timing;
    let mut out = String::new();
    out.push_str(&format!(
        "timing over a {}-observation window — {} iterations after {} warmup, seed {}\n",
        t.window, t.iterations, t.warmup, c.seed
    ));
    out.push_str(&format!(
        "source: simulated (k = {}, T = {}), p = {}, s = {}, grid = {}, starting lambda = {:.6}\n\n",
        c.k, c.t_len, c.p, c.s, c.grid_size, t.lambda_init
    ));
    out.push_str(&header_row(&[
        "method (ms)",
        "min",
        "q1",
        "mean",
        "median",
        "q3",
        "max",
    ]));
    for row in &t.rows {
        out.push_str(&value_row(
            &row.label,
            &[
                row.min_ms,
                row.q1_ms,
                row.mean_ms,
                row.median_ms,
                row.q3_ms,
                row.max_ms,
            ],
        ));
    }
    out.push_str(&format!(
        "\nmean-time speedup vs rolling validation: gradient {:.2}x, newton {:.2}x\n",
        t.speedup_gradient, t.speedup_newton
    ));
    out
}

/// Per-method summary rows as CSV.
pub fn write_evaluation_csv<W: Write>(out: W, report: &EvaluationReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "mean_msfe", "relative_msfe"])?;
    for m in &report.methods {
        w.write_record(&[
            m.method.label().to_owned(),
            m.mean_msfe.to_string(),
            m.relative_msfe.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The MSFE(λ) curve as CSV.
pub fn write_tune_csv<W: Write>(out: W, report: &TuneReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "msfe", "selected"])?;
    for (i, (lambda, msfe)) in report.grid.iter().zip(&report.msfe).enumerate() {
        w.write_record(&[
            lambda.to_string(),
            msfe.to_string(),
            (i == report.selected_index).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Timing distribution rows as CSV.
pub fn write_bench_csv<W: Write>(out: W, report: &BenchReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method", "min_ms", "q1_ms", "mean_ms", "median_ms", "q3_ms", "max_ms",
    ])?;
    for row in &report.timing.rows {
        w.write_record(&[
            row.label.clone(),
            row.min_ms.to_string(),
            row.q1_ms.to_string(),
            row.mean_ms.to_string(),
            row.median_ms.to_string(),
            row.q3_ms.to_string(),
            row.max_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_experiment, DataSource, ExperimentConfig, Method};
    use reclasso::datagen::SimConfig;

    fn sample_report() -> EvaluationReport {
        let mut sim = SimConfig::new(1, 2, 1, 80);
        sim.density = 0.5;
        run_experiment(&ExperimentConfig {
            source: DataSource::Simulate(sim),
            p: 2,
            s: 1,
            grid_size: 6,
            eta: 0.1,
            methods: vec![Method::Gradient, Method::Mean],
            reps: 1,
            seed: 9,
            train_frac: None,
            normalize: false,
        })
        .unwrap()
    }

    #[test]
    fn evaluation_table_shows_the_unit_baseline() {
        let table = evaluation_table(&sample_report());
        assert!(table.contains("static"));
        assert!(table.contains("1.0000"));
        assert!(table.contains("gradient"));
        assert!(table.contains("mean"));
    }

    #[test]
    fn evaluation_csv_round_trips_through_a_reader() {
        let report = sample_report();
        let mut buf = Vec::new();
        write_evaluation_csv(&mut buf, &report).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), report.methods.len());
        assert_eq!(&rows[0][0], "static");
        let rel: f64 = rows[0][2].parse().unwrap();
        assert_eq!(rel, 1.0);
    }

    #[test]
    fn json_reports_end_with_a_newline() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_json(&path, &sample_report()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"relative_msfe\""));
    }
}
