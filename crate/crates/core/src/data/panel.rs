use std::collections::BTreeSet;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::series::{parse_date, RawSeries};
use crate::error::{Error, Result};
use crate::linalg::RowMatrix;

/// Minimum number of observations the estimation stages accept.
pub const MIN_ESTIMATION_LENGTH: usize = 30;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub use_log: bool,
    /// 0 (levels) or 1 (first differences).
    pub differencing_order: u8,
}

impl TransformSpec {
    pub const IDENTITY: TransformSpec = TransformSpec {
        use_log: false,
        differencing_order: 0,
    };

    pub fn new(use_log: bool, differencing_order: u8) -> Result<Self> {
        if differencing_order > 1 {
            return Err(Error::InvalidInput(format!(
                "differencing order {differencing_order} not in {{0, 1}}"
            )));
        }
        Ok(Self {
            use_log,
            differencing_order,
        })
    }
}

/// Date-indexed T×N panel with a complete observation vector at every date.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    pub dates: Vec<NaiveDate>,
    pub matrix: RowMatrix,
    pub names: Vec<String>,
    pub transforms: Vec<TransformSpec>,
}

impl AlignedPanel {
    pub fn new(dates: Vec<NaiveDate>, columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.len() != names.len() {
            return Err(Error::InvalidInput("column/name count mismatch".into()));
        }
        if columns.iter().any(|c| c.len() != dates.len()) {
            return Err(Error::InvalidInput("column length differs from date count".into()));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("dates not strictly increasing".into()));
        }
        let transforms = vec![TransformSpec::IDENTITY; columns.len()];
        Ok(Self {
            dates,
            matrix: RowMatrix::from_columns(&columns),
            names,
            transforms,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.matrix.column(i)
    }
}

/// Inner join: keeps exactly the dates observed in every series, columns in
/// the order given.
pub fn align_panel(series: &[RawSeries]) -> Result<AlignedPanel> {
    if series.len() < 2 {
        return Err(Error::InvalidInput("alignment needs at least two series".into()));
    }
    let mut common: BTreeSet<NaiveDate> = series[0].timestamps.iter().copied().collect();
    for s in &series[1..] {
        let other: BTreeSet<NaiveDate> = s.timestamps.iter().copied().collect();
        common = common.intersection(&other).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let columns = series
        .iter()
        .map(|s| {
            // timestamps are sorted, so a merge walk picks the shared dates
            let mut out = Vec::with_capacity(dates.len());
            let mut k = 0;
            for (d, v) in s.timestamps.iter().zip(&s.values) {
                if k < dates.len() && *d == dates[k] {
                    out.push(*v);
                    k += 1;
                }
            }
            out
        })
        .collect();
    AlignedPanel::new(dates, columns, series.iter().map(|s| s.name.clone()).collect())
}

/// Applies per-series log and differencing. Mixed orders drop the leading
/// rows of every column so the panel stays rectangular.
pub fn apply_transform(panel: &AlignedPanel, specs: &[TransformSpec]) -> Result<AlignedPanel> {
    if specs.len() != panel.n_series() {
        return Err(Error::InvalidInput(format!(
            "{} transform specs for {} series",
            specs.len(),
            panel.n_series()
        )));
    }
    if panel.transforms.iter().any(|t| *t != TransformSpec::IDENTITY) {
        return Err(Error::InvalidInput("panel is already transformed".into()));
    }
    let shift = specs.iter().map(|s| s.differencing_order as usize).max().unwrap_or(0);
    if panel.len() <= shift {
        return Err(Error::TooShort {
            needed: shift + 1,
            got: panel.len(),
        });
    }
    let mut columns = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let mut col = panel.column(i);
        if spec.use_log {
            if col.iter().any(|v| *v <= 0.0) {
                return Err(Error::NonPositiveLog(panel.names[i].clone()));
            }
            col.iter_mut().for_each(|v| *v = v.ln());
        }
        let col: Vec<f64> = match spec.differencing_order {
            0 => col[shift..].to_vec(),
            _ => col.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()[shift - 1..].to_vec(),
        };
        columns.push(col);
    }
    let mut out = AlignedPanel::new(panel.dates[shift..].to_vec(), columns, panel.names.clone())?;
    out.transforms = specs.to_vec();
    Ok(out)
}

/// Writes `date,<name>,...` rows (RFC-4180 quoting).
pub fn write_panel_csv<W: Write>(dates: &[NaiveDate], names: &[String], matrix: &RowMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (t, d) in dates.iter().enumerate() {
        let mut rec = vec![d.to_string()];
        rec.extend(matrix.row(t).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Reads the panel CSV format written by [`write_panel_csv`].
pub fn read_panel_csv<R: Read>(reader: R) -> Result<AlignedPanel> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("date") || headers.len() < 2 {
        return Err(Error::InvalidInput("panel CSV must start with a `date` column".into()));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut dates = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record?;
        dates.push(parse_date(&record[0])?);
        for (i, col) in columns.iter_mut().enumerate() {
            let cell = record.get(i + 1).unwrap_or("");
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad number `{cell}` in panel CSV")))?;
            col.push(v);
        }
    }
    AlignedPanel::new(dates, columns, names)
}
