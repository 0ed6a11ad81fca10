//! Dataset CSV, per-slot trace CSV and summary JSON.

use std::fs;
use std::path::Path;

use cora_core::domain::{FeatureVector, Label, UserRecord};
use cora_core::engine::{cumulative_positive_rate, cumulative_queue_mean, RunTrace};
use serde::Serialize;

use crate::error::{SimError, SimResult};
use crate::floats::{fmt_f64, parse_f64, to_json_string};

/// Reads `x1,...,xD,label` records. Every row must have `D + 1` fields.
pub fn load_dataset(path: &Path) -> SimResult<Vec<UserRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| SimError::csv(path, e))?;
    let headers = reader.headers().map_err(|e| SimError::csv(path, e))?.clone();
    let width = headers.len();
    if width < 2 || headers.get(width - 1) != Some("label") {
        return Err(parse_err(path, 1, "header must be x1,...,xD,label"));
    }
    for (i, h) in headers.iter().take(width - 1).enumerate() {
        if h != format!("x{}", i + 1) {
            return Err(parse_err(path, 1, format!("expected column x{}, found '{h}'", i + 1)));
        }
    }
    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let line = row + 2;
        let rec = result.map_err(|e| SimError::csv(path, e))?;
        if rec.len() != width {
            return Err(parse_err(path, line, format!("expected {width} fields, found {}", rec.len())));
        }
        let features = rec
            .iter()
            .take(width - 1)
            .map(|f| parse_f64(f).ok_or_else(|| parse_err(path, line, format!("bad number '{f}'"))))
            .collect::<SimResult<Vec<f64>>>()?;
        let label = match rec.get(width - 1).map(str::trim) {
            Some("0") => Label::Negative,
            Some("1") => Label::Positive,
            other => return Err(parse_err(path, line, format!("label must be 0 or 1, found {other:?}"))),
        };
        let features = FeatureVector::new(features).map_err(|e| parse_err(path, line, e.to_string()))?;
        records.push(UserRecord { features, label });
    }
    if records.is_empty() {
        return Err(parse_err(path, 1, "no records"));
    }
    Ok(records)
}

pub fn save_dataset(path: &Path, records: &[UserRecord]) -> SimResult<()> {
    let d = records.first().map_or(0, |r| r.features.len());
    let mut writer = csv_writer(path)?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    writer.write_record(&header).map_err(|e| SimError::csv(path, e))?;
    for rec in records {
        if rec.features.len() != d {
            return Err(SimError::usage("records have different feature dimensions"));
        }
        let mut row: Vec<String> = rec.features.as_slice().iter().map(|v| fmt_f64(*v)).collect();
        row.push(rec.label.as_u8().to_string());
        writer.write_record(&row).map_err(|e| SimError::csv(path, e))?;
    }
    writer.flush().map_err(|e| SimError::io(path, e))
}

/// Column names of the per-slot trace for `k` resources.
pub fn trace_header(k: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=k).map(|i| format!("r_{i}")));
    cols.extend((1..=k).map(|i| format!("Q_{i}")));
    cols.extend(["pred_prob", "label", "cum_positive_rate", "cum_queue_mean"].map(String::from));
    cols
}

/// One row per slot. `label` is the realized label, or the fraction of
/// complaining members when a slot served several users.
pub fn write_trace(path: &Path, trace: &RunTrace) -> SimResult<()> {
    let k = trace.config_echo.budget.len();
    let mut writer = csv_writer(path)?;
    writer.write_record(trace_header(k)).map_err(|e| SimError::csv(path, e))?;
    let rates = cumulative_positive_rate(&trace.outcomes);
    let queues = cumulative_queue_mean(&trace.outcomes);
    for ((o, rate), queue) in trace.outcomes.iter().zip(rates).zip(queues) {
        let mut row = vec![o.slot.to_string()];
        row.extend(o.allocation.as_slice().iter().map(|v| fmt_f64(*v)));
        row.extend(o.queue_snapshot.lengths().iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(o.predicted_prob));
        row.push(match o.realized_label() {
            Some(label) => label.as_u8().to_string(),
            None => fmt_f64(o.positives as f64 / o.users as f64),
        });
        row.push(fmt_f64(rate));
        row.push(fmt_f64(queue));
        writer.write_record(&row).map_err(|e| SimError::csv(path, e))?;
    }
    writer.flush().map_err(|e| SimError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> SimResult<()> {
    let text = to_json_string(value)?;
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> SimResult<()> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))
}

pub(crate) fn csv_writer(path: &Path) -> SimResult<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| SimError::csv(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> SimError {
    SimError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}
