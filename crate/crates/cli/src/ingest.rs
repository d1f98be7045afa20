//! CSV ingestion: parsing, stationarity transforms, quarterly aggregation,
//! and prefix-anchored normalization.
//!
//! Input files are UTF-8 comma-separated with a header row of names whose
//! first column is a time index. An optional second header row carries
//! integer transform codes (1–7): it is recognized when its time cell is
//! blank or non-numeric and every remaining cell is an integer in that
//! range. The time column's values are not interpreted; rows are assumed
//! chronological.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::error::CliError;
use reclasso::arx::SeriesSet;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("cannot parse '{value}' at data row {row}, column '{column}'")]
    ParseError {
        row: usize,
        column: String,
        value: String,
    },
    #[error("column '{0}' not found")]
    MissingColumn(String),
    #[error("column '{column}' contains a non-finite value after transformation")]
    NonFinite { column: String },
    #[error("log transform requires positive values, got {value} at position {index}")]
    NonPositiveForLog { value: f64, index: usize },
    #[error("percent-change transform hit a zero at position {index}")]
    ZeroInRatio { index: usize },
    #[error("transform code {0} is not in 1..=7")]
    InvalidCode(u8),
    #[error("transform needs at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("series is constant over the statistics window")]
    ConstantSeries,
    #[error("normalization window must hold at least 2 points, got {0}")]
    WindowTooSmall(usize),
    #[error("file has no data rows")]
    Empty,
    #[error("file needs a time column plus at least one series column")]
    NoSeries,
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Stationarity transform, following the common integer coding used by
/// public macroeconomic panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// 1: level.
    Level,
    /// 2: first difference.
    Diff,
    /// 3: second difference.
    DiffDiff,
    /// 4: natural log.
    Log,
    /// 5: first difference of the log.
    DiffLog,
    /// 6: second difference of the log.
    DiffDiffLog,
    /// 7: first difference of the period-on-period percent change.
    DiffPctChange,
}

impl Transform {
    pub fn from_code(code: u8) -> Result<Self, IngestError> {
        Ok(match code {
            1 => Transform::Level,
            2 => Transform::Diff,
            3 => Transform::DiffDiff,
            4 => Transform::Log,
            5 => Transform::DiffLog,
            6 => Transform::DiffDiffLog,
            7 => Transform::DiffPctChange,
            other => return Err(IngestError::InvalidCode(other)),
        })
    }

    pub fn code(&self) -> u8 {
        match self {
            Transform::Level => 1,
            Transform::Diff => 2,
            Transform::DiffDiff => 3,
            Transform::Log => 4,
            Transform::DiffLog => 5,
            Transform::DiffDiffLog => 6,
            Transform::DiffPctChange => 7,
        }
    }

    /// Observations lost at the head of the series.
    pub fn shortening(&self) -> usize {
        match self {
            Transform::Level | Transform::Log => 0,
            Transform::Diff | Transform::DiffLog => 1,
            Transform::DiffDiff | Transform::DiffDiffLog | Transform::DiffPctChange => 2,
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

fn diff(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[1] - w[0]).collect()
}

fn logs(series: &[f64]) -> Result<Vec<f64>, IngestError> {
    series
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 {
                Ok(value.ln())
            } else {
                Err(IngestError::NonPositiveForLog { value, index })
            }
        })
        .collect()
}

/// Applies one stationarity transform. Output is shorter than the input by
/// [`Transform::shortening`] — leading undefined entries are dropped.
pub fn apply_transform(series: &[f64], t: Transform) -> Result<Vec<f64>, IngestError> {
    let needed = t.shortening() + 1;
    if series.len() < needed {
        return Err(IngestError::TooShort {
            needed,
            got: series.len(),
        });
    }
    Ok(match t {
        Transform::Level => series.to_vec(),
        Transform::Diff => diff(series),
        Transform::DiffDiff => diff(&diff(series)),
        Transform::Log => logs(series)?,
        Transform::DiffLog => diff(&logs(series)?),
        Transform::DiffDiffLog => diff(&diff(&logs(series)?)),
        Transform::DiffPctChange => {
            let mut pct = Vec::with_capacity(series.len() - 1);
            for (index, w) in series.windows(2).enumerate() {
                if w[0] == 0.0 {
                    return Err(IngestError::ZeroInRatio { index });
                }
                pct.push(w[1] / w[0] - 1.0);
            }
            diff(&pct)
        }
    })
}

/// Standardizes a series using mean and standard deviation estimated from
/// its first `stat_len` points only (denominator `n - 1`), so statistics
/// never leak in from the evaluation period. Returns the transformed series
/// with the statistics for inverting the map.
pub fn normalize(series: &[f64], stat_len: usize) -> Result<(Vec<f64>, f64, f64), IngestError> {
    if stat_len < 2 || stat_len > series.len() {
        return Err(IngestError::WindowTooSmall(stat_len));
    }
    let window = &series[..stat_len];
    let mean = window.iter().sum::<f64>() / stat_len as f64;
    let ss = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let sd = (ss / (stat_len - 1) as f64).sqrt();
    if sd <= 0.0 || !sd.is_finite() {
        return Err(IngestError::ConstantSeries);
    }
    let out = series.iter().map(|v| (v - mean) / sd).collect();
    Ok((out, mean, sd))
}

/// Mean over consecutive blocks of three observations; a trailing partial
/// block is dropped.
pub fn aggregate_quarterly(series: &[f64]) -> Vec<f64> {
    series
        .chunks_exact(3)
        .map(|c| (c[0] + c[1] + c[2]) / 3.0)
        .collect()
}

/// A parsed CSV panel before transforms: data columns only, the time
/// column already stripped.
#[derive(Debug, Clone)]
pub struct Panel {
    pub names: Vec<String>,
    pub codes: Vec<Transform>,
    pub columns: Vec<Vec<f64>>,
}

/// How to turn a file into a [`SeriesSet`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Name of the target column; the first data column when omitted.
    pub target: Option<String>,
    /// Aggregate each raw column to quarterly frequency (3-point means)
    /// before any transform is applied.
    pub quarterly: bool,
}

/// Ingestion result: the aligned series plus the provenance of each.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub series: SeriesSet<f64>,
    pub target_name: String,
    pub exo_names: Vec<String>,
    /// Transform codes in the same order: target first, then exogenous.
    pub codes: Vec<Transform>,
}

fn looks_like_codes_row(record: &csv::StringRecord) -> bool {
    let mut cells = record.iter();
    let first_is_label = cells
        .next()
        .map(|c| c.trim().is_empty() || c.trim().parse::<f64>().is_err())
        .unwrap_or(false);
    first_is_label
        && record.len() > 1
        && record
            .iter()
            .skip(1)
            .all(|c| matches!(c.trim().parse::<u8>(), Ok(1..=7)))
}

/// Parses the panel format: header row of names (first column the time
/// index), optional transform-code row, then numeric data rows.
pub fn read_panel<R: Read>(reader: R) -> Result<Panel, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(Ok(rec)) => rec,
        Some(Err(_)) | None => return Err(IngestError::Empty),
    };
    if header.len() < 2 {
        return Err(IngestError::NoSeries);
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let width = names.len();

    let mut codes = vec![Transform::Level; width];
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
    let mut first_data = true;
    let mut data_row = 0usize;
    for rec in records {
        let rec = rec.map_err(|_| IngestError::Empty)?;
        if first_data && looks_like_codes_row(&rec) {
            for (j, cell) in rec.iter().skip(1).enumerate() {
                codes[j] = Transform::from_code(cell.parse::<u8>().expect("checked above"))?;
            }
            first_data = false;
            continue;
        }
        first_data = false;
        data_row += 1;
        if rec.len() != width + 1 {
            return Err(IngestError::ParseError {
                row: data_row,
                column: format!("(expected {} fields, got {})", width + 1, rec.len()),
                value: String::new(),
            });
        }
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let value: f64 = cell.parse().map_err(|_| IngestError::ParseError {
                row: data_row,
                column: names[j].clone(),
                value: cell.to_owned(),
            })?;
            columns[j].push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Panel {
        names,
        codes,
        columns,
    })
}

/// Reads a file, applies aggregation and transforms, and aligns everything
/// into a [`SeriesSet`] with the requested target first.
///
/// Transforms of different orders shorten columns differently; all columns
/// are trimmed from the left (oldest observations dropped) to the common
/// length.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<LoadedData, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let panel = read_panel(file)?;
    build_series(panel, opts)
}

/// The transform/alignment half of [`load_csv`], usable on an in-memory
/// panel.
pub fn build_series(panel: Panel, opts: &LoadOptions) -> Result<LoadedData, CliError> {
    let target_idx = match &opts.target {
        None => 0,
        Some(name) => panel
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| IngestError::MissingColumn(name.clone()))?,
    };

    let mut order: Vec<usize> = Vec::with_capacity(panel.names.len());
    order.push(target_idx);
    order.extend((0..panel.names.len()).filter(|&j| j != target_idx));

    let mut transformed: Vec<Vec<f64>> = Vec::with_capacity(order.len());
    for &j in &order {
        let raw = if opts.quarterly {
            aggregate_quarterly(&panel.columns[j])
        } else {
            panel.columns[j].clone()
        };
        let out = apply_transform(&raw, panel.codes[j]).map_err(|e| {
            CliError::Data(format!("column '{}': {e}", panel.names[j]))
        })?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(IngestError::NonFinite {
                column: panel.names[j].clone(),
            }
            .into());
        }
        transformed.push(out);
    }

    let common = transformed.iter().map(Vec::len).min().unwrap_or(0);
    if common == 0 {
        return Err(IngestError::Empty.into());
    }
    let mut aligned = transformed
        .into_iter()
        .map(|col| col[col.len() - common..].to_vec());
    let y = aligned.next().expect("target column present");
    let x: Vec<Vec<f64>> = aligned.collect();

    let series = SeriesSet::new(y, x).map_err(CliError::from)?;
    Ok(LoadedData {
        series,
        target_name: panel.names[target_idx].clone(),
        exo_names: order[1..]
            .iter()
            .map(|&j| panel.names[j].clone())
            .collect(),
        codes: order.iter().map(|&j| panel.codes[j]).collect(),
    })
}

/// Writes a series set in the panel format: integer time index, one column
/// per series, and a transform-code row (all levels) so the file reloads
/// to the same values.
pub fn write_csv<W: Write>(
    out: W,
    series: &SeriesSet<f64>,
    target_name: &str,
    exo_names: &[String],
) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_owned(), target_name.to_owned()];
    header.extend(exo_names.iter().cloned());
    wtr.write_record(&header)?;

    let mut codes = vec!["transform".to_owned()];
    codes.extend(std::iter::repeat_n("1".to_owned(), 1 + series.k()));
    wtr.write_record(&codes)?;

    for t in 0..series.len() {
        let mut row = vec![t.to_string(), series.y()[t].to_string()];
        for xi in series.x() {
            row.push(xi[t].to_string());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Default exogenous column names `x1..xk`.
pub fn default_exo_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}
