use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed daily series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub name: String,
    pub timestamps: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// File path or URL the data came from.
    pub source: String,
    /// Rows skipped because the value was blank or unparseable.
    pub dropped_rows: usize,
}

impl RawSeries {
    /// Validates ordering and finiteness. Sorts by date first.
    pub fn new(name: impl Into<String>, mut rows: Vec<(NaiveDate, f64)>, source: impl Into<String>) -> Result<Self> {
        let source = source.into();
        rows.sort_by_key(|(d, _)| *d);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateTimestamp {
                date: w[0].0.to_string(),
                source_name: source,
            });
        }
        if rows.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value in {source}")));
        }
        let (timestamps, values) = rows.into_iter().unzip();
        Ok(Self {
            name: name.into(),
            timestamps,
            values,
            source,
            dropped_rows: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Writes a two-column `date,<value_column>` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>, value_column: &str) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["date", value_column])?;
        for (d, v) in self.timestamps.iter().zip(&self.values) {
            w.write_record([d.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Observations with `start <= date <= end`.
    pub fn window(&self, start: NaiveDate, end: NaiveDate) -> RawSeries {
        let (timestamps, values) = self
            .timestamps
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| **d >= start && **d <= end)
            .map(|(d, v)| (*d, *v))
            .unzip();
        RawSeries {
            timestamps,
            values,
            ..self.clone()
        }
    }
}

/// Parses ISO-8601 (`2020-03-05`) or US (`3/5/2020`) calendar dates.
pub fn parse_date(s: &str) -> Result<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .map_err(|_| Error::BadDate(s.to_string()))
}

/// Reads a headed CSV file into a series named after `value_column`.
pub fn load_series_csv(path: impl AsRef<Path>, date_column: &str, value_column: &str) -> Result<RawSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_series_csv(file, date_column, value_column, &path.display().to_string())
}

/// Parses CSV bytes from any reader. Rows whose value cell is blank or not a
/// finite number are dropped and counted; an unparseable date is an error.
pub fn parse_series_csv<R: Read>(reader: R, date_column: &str, value_column: &str, source: &str) -> Result<RawSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn {
            column: name.to_string(),
            source_name: source.to_string(),
        })
    };
    let di = find(date_column)?;
    let vi = find(value_column)?;

    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in rdr.records() {
        let record = record?;
        let (Some(d), Some(v)) = (record.get(di), record.get(vi)) else {
            dropped += 1;
            continue;
        };
        if d.is_empty() {
            dropped += 1;
            continue;
        }
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => rows.push((parse_date(d)?, x)),
            _ => dropped += 1,
        }
    }
    if rows.is_empty() {
        return Err(Error::NoRows(source.to_string()));
    }
    let mut series = RawSeries::new(value_column, rows, source)?;
    series.dropped_rows = dropped;
    Ok(series)
}
