//! CSV interchange format.
//!
//! Header `timestamp,line_id,value`; one row per grid cell. Timestamps are
//! integer epoch seconds, values are decimal literals (an empty field is a
//! missing cell, the literal `nan` a non-numeric one), UTF-8 with LF line
//! endings. Values are written in the shortest form that parses back to the
//! same bits, so write-read round-trips are exact. Rows that cannot be
//! parsed are skipped and reported to the caller; they never abort a read.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::series::{densify, SampleValue, SeriesWindow, TimeGrid};
use crate::{Error, Result};

pub const HEADER: &str = "timestamp,line_id,value";

/// Rows skipped during a read, with 1-based row numbers and reasons.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseLog {
    pub skipped: Vec<(usize, String)>,
}

fn valid_line_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '#'))
}

/// Writes windows as wire CSV, sorted by line id, ascending time per line.
pub fn write_csv<W: Write>(out: &mut W, windows: &[SeriesWindow], grid: &TimeGrid) -> Result<()> {
    let mut order: Vec<&SeriesWindow> = windows.iter().collect();
    order.sort_by(|a, b| a.line_id.cmp(&b.line_id));
    writeln!(out, "{HEADER}")?;
    for w in order {
        for (k, sample) in w.samples.iter().enumerate() {
            let ts = grid.epoch_of(w.index_at(k));
            match sample {
                SampleValue::Present(v) if v.is_finite() => {
                    writeln!(out, "{ts},{},{v}", w.line_id)?
                }
                SampleValue::Missing => writeln!(out, "{ts},{},", w.line_id)?,
                _ => writeln!(out, "{ts},{},nan", w.line_id)?,
            }
        }
    }
    Ok(())
}

/// Convenience wrapper returning the CSV as a string.
pub fn csv_string(windows: &[SeriesWindow], grid: &TimeGrid) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, windows, grid).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("wire CSV is ASCII")
}

/// Reads wire CSV: groups rows by line id, densifies each line onto the
/// grid (gaps become missing cells), and returns windows sorted by line id
/// together with the log of skipped rows.
pub fn read_csv<R: BufRead>(input: R, grid: &TimeGrid) -> Result<(Vec<SeriesWindow>, ParseLog)> {
    let mut log = ParseLog::default();
    let mut by_line: BTreeMap<String, Vec<(i64, Option<f64>)>> = BTreeMap::new();
    let mut lines = input.lines();

    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::BadInput("empty file".into())),
    };
    let header = header.strip_suffix('\r').unwrap_or(&header);
    let header = header.strip_prefix('\u{feff}').unwrap_or(header);
    if header != HEADER {
        return Err(Error::BadInput(format!(
            "expected header `{HEADER}`, found `{header}`"
        )));
    }

    for (row_0, line) in lines.enumerate() {
        let row = row_0 + 2; // 1-based, after the header
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, ',');
        let (ts, id, value) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                log.skipped.push((row, "expected 3 fields".into()));
                continue;
            }
        };
        let epoch: i64 = match ts.parse() {
            Ok(e) => e,
            Err(_) => {
                log.skipped.push((row, format!("bad timestamp `{ts}`")));
                continue;
            }
        };
        if grid.index_of(epoch).is_err() {
            log.skipped
                .push((row, format!("timestamp {epoch} precedes grid origin")));
            continue;
        }
        if !valid_line_id(id) {
            log.skipped.push((row, format!("bad line id `{id}`")));
            continue;
        }
        let payload: Option<f64> = if value.is_empty() {
            None
        } else {
            match value.parse::<f64>() {
                Ok(v) => Some(v),
                Err(_) => {
                    log.skipped.push((row, format!("bad value `{value}`")));
                    continue;
                }
            }
        };
        by_line
            .entry(id.to_string())
            .or_default()
            .push((epoch, payload));
    }

    let mut windows = Vec::with_capacity(by_line.len());
    for (id, points) in by_line {
        windows.push(densify(id, &points, grid)?);
    }
    Ok((windows, log))
}
