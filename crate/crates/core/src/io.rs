//! File formats: CSV series in, explanation documents and plot data out.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::detect::AnomalyCandidate;
use crate::error::{Error, Result};
use crate::explain::{index_to_timestamp, Explanation};
use crate::series::{znormalize_values, TimeSeries};

/// Version of the [`ExplanationDocument`] layout. Bumped on any change that
/// breaks readers of the schema in `schema/explanation-document.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    /// `None` detects a header from a non-numeric first row.
    pub has_header: Option<bool>,
    /// Largest allowed deviation of a timestamp interval from the median
    /// interval, as a fraction of the median.
    pub spacing_tolerance: f64,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: None,
            spacing_tolerance: 0.01,
        }
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|t| t.naive_local()))
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

/// Read a series from a CSV file with either one value per row or
/// `timestamp,value` rows. Two-column files get a start time and the median
/// sample period.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_csv(file, &path.display().to_string(), options)
}

pub fn read_csv(reader: impl std::io::Read, name: &str, options: &CsvOptions) -> Result<TimeSeries> {
    let err = |line: u64, message: String| Error::Csv {
        path: name.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut values = Vec::new();
    let mut stamps: Vec<NaiveDateTime> = Vec::new();
    let mut columns: Option<usize> = None;
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let is_first = std::mem::replace(&mut first, false);
        let width = record.len();
        if !(width == 1 || width == 2) {
            return Err(err(line, format!("expected 1 or 2 columns, found {width}")));
        }
        let value_field = &record[width - 1];
        let parsed = value_field.parse::<f64>();
        if is_first {
            let header = match options.has_header {
                Some(h) => h,
                None => parsed.is_err() || (width == 2 && parse_timestamp(&record[0]).is_none()),
            };
            if header {
                continue;
            }
        }
        match columns {
            None => columns = Some(width),
            Some(c) if c != width => {
                return Err(err(line, format!("expected {c} columns, found {width}")));
            }
            Some(_) => {}
        }
        let v = parsed.map_err(|_| err(line, format!("not a number: {value_field:?}")))?;
        if !v.is_finite() {
            return Err(err(line, format!("non-finite value {value_field:?}")));
        }
        if width == 2 {
            let t = parse_timestamp(&record[0])
                .ok_or_else(|| err(line, format!("not an ISO-8601 timestamp: {:?}", &record[0])))?;
            stamps.push(t);
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(err(0, "no data rows".into()));
    }
    let series = TimeSeries::new(values)?;
    if stamps.is_empty() {
        return Ok(series);
    }
    if stamps.len() < 2 {
        return Ok(series.with_start_time(stamps[0]));
    }
    let mut intervals: Vec<f64> = stamps
        .windows(2)
        .map(|w| (w[1] - w[0]).num_nanoseconds().unwrap_or(i64::MAX) as f64 / 1e9)
        .collect();
    let mut sorted = intervals.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if median <= 0.0 || median.is_nan() {
        return Err(err(0, "timestamps must increase".into()));
    }
    for (i, d) in intervals.drain(..).enumerate() {
        if (d - median).abs() > options.spacing_tolerance * median {
            return Err(err(
                0,
                format!(
                    "non-uniform spacing: interval {} after {} is {d}s, median {median}s",
                    i + 1,
                    stamps[i]
                ),
            ));
        }
    }
    Ok(series.with_sample_period(median)?.with_start_time(stamps[0]))
}

/// Write a series as CSV: `timestamp,value` rows when the series has a
/// start time, bare values otherwise. Values use the shortest string that
/// reads back to the same `f64`.
pub fn write_csv(out: impl Write, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::Io(std::io::Error::other(e));
    match series.start_time() {
        Some(_) => {
            w.write_record(["timestamp", "value"]).map_err(map)?;
            for (i, v) in series.values().iter().enumerate() {
                let t = index_to_timestamp(i, series).expect("timed series");
                let stamp = t.format("%Y-%m-%dT%H:%M:%S%.f").to_string();
                w.write_record([stamp, v.to_string()]).map_err(map)?;
            }
        }
        None => {
            w.write_record(["value"]).map_err(map)?;
            for v in series.values() {
                w.write_record([v.to_string()]).map_err(map)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Where the explained data came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub train_file: String,
    pub test_file: String,
    /// Start of the explained window in the test file.
    pub test_offset: usize,
    /// Start of the nearest neighbor in the training file.
    pub train_offset: usize,
    pub window: usize,
}

/// A detected window without its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub location: usize,
    pub score: f64,
    pub neighbor_location: usize,
    pub neighbor_distance: f64,
}

impl From<&AnomalyCandidate> for CandidateRecord {
    fn from(c: &AnomalyCandidate) -> Self {
        CandidateRecord {
            location: c.location,
            score: c.score,
            neighbor_location: c.neighbor_location,
            neighbor_distance: c.neighbor_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationDocument {
    pub schema_version: u32,
    pub input: Provenance,
    pub candidate: CandidateRecord,
    pub explanation: Explanation,
    pub text: String,
}

impl ExplanationDocument {
    pub fn new(input: Provenance, candidate: CandidateRecord, explanation: Explanation) -> Self {
        let text = explanation.text.clone();
        ExplanationDocument {
            schema_version: SCHEMA_VERSION,
            input,
            candidate,
            explanation,
            text,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Tab-separated overlay of the z-normalized anomaly, its neighbor and the
/// winning operator's transformed anomaly (blank when the operator does not
/// produce one).
pub fn write_plot_data(
    mut out: impl Write,
    anomaly: &[f64],
    neighbor: &[f64],
    transformed: Option<&[f64]>,
) -> Result<()> {
    let za = znormalize_values(anomaly);
    let zn = znormalize_values(neighbor);
    writeln!(out, "index\tanomaly\tneighbor\ttransformed")?;
    for i in 0..za.len() {
        let t = transformed
            .and_then(|t| t.get(i))
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(out, "{i}\t{}\t{}\t{t}", za[i], zn[i])?;
    }
    Ok(())
}
