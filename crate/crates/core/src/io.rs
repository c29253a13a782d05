//! Signal and trace file formats.
//!
//! * signals: one decimal number per line (blank lines and `#` comments are
//!   skipped), or one column of a CSV file;
//! * traces: CSV with header `k,t,candidates,intervals,pruned`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pruned::StepTrace;

/// Column selector for CSV input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    /// 0-based position.
    Index(usize),
    /// Header name; the first row must be a header.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignalFormat {
    Floats,
    Csv(Column),
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty column selector".into()));
        }
        Ok(s.parse::<usize>()
            .map(Column::Index)
            .unwrap_or_else(|_| Column::Name(s.to_string())))
    }
}

impl FromStr for SignalFormat {
    type Err = Error;

    /// `floats`, `csv` (first column) or `csv:<index|name>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None if s == "floats" => Ok(SignalFormat::Floats),
            None if s == "csv" => Ok(SignalFormat::Csv(Column::Index(0))),
            Some(("csv", col)) => Ok(SignalFormat::Csv(col.parse()?)),
            _ => Err(Error::Config(format!("unknown signal format {s:?}"))),
        }
    }
}

fn parse_error(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_value(path: &str, line: usize, field: &str) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_error(path, line, format!("not a number: {:?}", field.trim())))?;
    if !value.is_finite() {
        return Err(parse_error(path, line, format!("non-finite value {value}")));
    }
    Ok(value)
}

/// Parses the newline-delimited float format. `origin` names the source in errors.
pub fn parse_floats(text: &str, origin: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_value(origin, i + 1, line)?);
    }
    if out.is_empty() {
        return Err(parse_error(origin, 0, "no observations"));
    }
    Ok(out)
}

/// Parses one column of CSV text.
pub fn parse_csv_column(text: &str, column: &Column, origin: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut index = match column {
        Column::Index(i) => Some(*i),
        Column::Name(_) => None,
    };
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(row + 1, |p| p.line() as usize);
            parse_error(origin, line, e.to_string())
        })?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        if row == 0 {
            if let Column::Name(name) = column {
                let found = record.iter().position(|h| h == name).ok_or_else(|| {
                    parse_error(origin, line, format!("no column named {name:?}"))
                })?;
                index = Some(found);
                continue;
            }
        }
        let col = index.expect("resolved above");
        let field = record
            .get(col)
            .ok_or_else(|| parse_error(origin, line, format!("missing column {col}")))?;
        match parse_value(origin, line, field) {
            Ok(v) => out.push(v),
            // a non-numeric first row is a header
            Err(_) if row == 0 && field.parse::<f64>().is_err() => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(parse_error(origin, 0, "no observations"));
    }
    Ok(out)
}

pub fn read_signal(path: impl AsRef<Path>, format: &SignalFormat) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    match format {
        SignalFormat::Floats => parse_floats(&text, &origin),
        SignalFormat::Csv(column) => parse_csv_column(&text, column, &origin),
    }
}

/// Newline-delimited, shortest round-trip decimal representation.
pub fn format_floats(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        writeln!(out, "{v}").expect("writing to a String");
    }
    out
}

pub fn write_signal(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_floats(values)).map_err(|e| Error::io(path, e))
}

pub const TRACE_HEADER: &str = "k,t,candidates,intervals,pruned";

/// One row of a trace CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub k: usize,
    pub t: usize,
    pub candidates: usize,
    pub intervals: usize,
    pub pruned: usize,
}

impl From<&StepTrace> for TraceRow {
    fn from(step: &StepTrace) -> Self {
        Self {
            k: step.k,
            t: step.t,
            candidates: step.n_candidates,
            intervals: step.n_intervals,
            pruned: step.pruned.len(),
        }
    }
}

pub fn format_trace(rows: impl IntoIterator<Item = TraceRow>) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.k, r.t, r.candidates, r.intervals, r.pruned
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_trace(path: impl AsRef<Path>, rows: impl IntoIterator<Item = TraceRow>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_trace(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_trace(text: &str, origin: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        _ => {
            return Err(parse_error(
                origin,
                1,
                format!("expected header {TRACE_HEADER:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_error(origin, i + 1, "expected 5 fields"));
        }
        let mut parsed = [0usize; 5];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| parse_error(origin, i + 1, format!("not an integer: {field:?}")))?;
        }
        let [k, t, candidates, intervals, pruned] = parsed;
        rows.push(TraceRow {
            k,
            t,
            candidates,
            intervals,
            pruned,
        });
    }
    Ok(rows)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, &path.display().to_string())
}
