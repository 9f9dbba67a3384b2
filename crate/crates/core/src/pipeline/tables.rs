//! Table 1 (first-step diagnostics) and Table 2 (second-step estimates).
//!
//! Cells are formatted once; the CSV and the aligned text rendering are two
//! views of the same strings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::correlation::{CorrFit, ModelKind};
use crate::diagnostics::ArmaSpec;
use crate::error::{Error, Result};
use crate::inference::LrResult;
use crate::simulation::RecoveryReport;

/// Three decimals, with negative zero printed as `0.000`.
pub fn fmt3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Parenthesized standard error; `(n/a)` when it is not identified.
pub fn fmt_se(se: Option<f64>) -> String {
    match se {
        Some(v) => format!("({})", fmt3(v)),
        None => "(n/a)".to_string(),
    }
}

/// Series label with a `Δ` prefix when the series was differenced.
pub fn series_label(name: &str, differenced: bool) -> String {
    if differenced {
        format!("Δ{name}")
    } else {
        name.to_string()
    }
}

/// Full DGP label, e.g. `Δpolls ARMA(0,0)`.
pub fn dgp_label(name: &str, differenced: bool, spec: ArmaSpec) -> String {
    format!("{} {spec}", series_label(name, differenced))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Left-aligned first column, right-aligned numbers.
    pub fn to_text(&self) -> String {
        let ncol = self.header.len();
        let width = |c: usize| {
            std::iter::once(&self.header)
                .chain(&self.rows)
                .map(|r| r.get(c).map_or(0, |s| s.chars().count()))
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..ncol).map(width).collect();
        let line = |r: &Vec<String>| {
            let cells: Vec<String> = (0..ncol)
                .map(|c| {
                    let s = r.get(c).map(String::as_str).unwrap_or("");
                    let pad = widths[c] - s.chars().count();
                    if c == 0 {
                        format!("{s}{}", " ".repeat(pad))
                    } else {
                        format!("{}{s}", " ".repeat(pad))
                    }
                })
                .collect();
            cells.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * ncol.saturating_sub(1)));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

/// One Table 1 row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub name: String,
    pub differenced: bool,
    pub spec: ArmaSpec,
    pub arch_lm_p: f64,
    pub garch: bool,
}

pub fn emit_table1(rows: &[Table1Row]) -> Table {
    Table {
        header: ["series", "DGP", "p-value ARCH test", "variance"].map(String::from).to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    series_label(&r.name, r.differenced),
                    r.spec.to_string(),
                    fmt3(r.arch_lm_p),
                    if r.garch { "GARCH(1,1)" } else { "unconditional" }.to_string(),
                ]
            })
            .collect(),
    }
}

/// LR statistics shown under the estimates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table2Tests {
    pub dcc_vs_ccc: Option<LrResult>,
    pub nlarc_vs_dcc: Option<LrResult>,
}

/// Columns follow the order CCC, DCC, NLARC among the fits supplied.
pub fn emit_table2(fits: &[CorrFit], tests: &Table2Tests) -> Result<Table> {
    if fits.is_empty() {
        return Err(Error::InvalidInput("Table 2 needs at least one fit".into()));
    }
    let mut fits: Vec<&CorrFit> = fits.iter().collect();
    fits.sort_by_key(|f| f.kind);
    let mut header = vec![String::new()];
    header.extend(fits.iter().map(|f| f.kind.label().to_string()));
    let ncol = header.len();
    let blank = || vec![String::new(); ncol];
    let mut rows = Vec::new();

    // parameter rows: estimate, then SE underneath
    for (label, k, owner) in [("phi_A", 2usize, ModelKind::Nlarc), ("a", 0, ModelKind::Dcc), ("b", 1, ModelKind::Dcc)] {
        if !fits.iter().any(|f| f.kind >= owner) {
            continue;
        }
        let mut est = blank();
        let mut se = blank();
        est[0] = label.to_string();
        for (c, f) in fits.iter().enumerate() {
            if f.kind.n_params() > k {
                est[c + 1] = fmt3(f.params()[k]);
                se[c + 1] = fmt_se(f.robust_se[k]);
            }
        }
        rows.push(est);
        rows.push(se);
    }
    let mut ll = vec!["Log-likelihood".to_string()];
    ll.extend(fits.iter().map(|f| fmt3(f.loglik)));
    rows.push(ll);
    let mut aic = vec!["AIC".to_string()];
    aic.extend(fits.iter().map(|f| fmt3(f.aic())));
    rows.push(aic);

    for (label, cv_label, lr) in [
        ("LR DCC vs CCC", "chi2(0.1, 2)", &tests.dcc_vs_ccc),
        ("LR DCC vs NLARC", "chi2(0.1, 1)", &tests.nlarc_vs_dcc),
    ] {
        if let Some(lr) = lr {
            let mut r = blank();
            r[0] = label.to_string();
            r[1] = fmt3(lr.statistic);
            rows.push(r);
            let mut r = blank();
            r[0] = cv_label.to_string();
            r[1] = format!("({})", fmt3(lr.critical_value_10pct));
            rows.push(r);
        }
    }
    Ok(Table { header, rows })
}

/// Monte Carlo summary: truth, mean estimate, RMSE and interval coverage.
pub fn recovery_table(report: &RecoveryReport) -> Table {
    let opt = |v: Option<f64>| v.map(fmt3).unwrap_or_else(|| "n/a".into());
    Table {
        header: ["parameter", "truth", "mean estimate", "RMSE", "coverage 2SE", "coverage 3SE"]
            .map(String::from)
            .to_vec(),
        rows: report
            .summaries
            .iter()
            .map(|s| {
                vec![
                    s.name.clone(),
                    opt(s.truth),
                    fmt3(s.mean_estimate),
                    opt(s.rmse),
                    opt(s.coverage_2se),
                    opt(s.coverage_3se),
                ]
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_rules() {
        assert_eq!(fmt3(0.0004), "0.000");
        assert_eq!(fmt3(-0.0004), "0.000");
        assert_eq!(fmt3(-406.795), "-406.795");
        assert_eq!(fmt_se(Some(0.0)), "(0.000)");
        assert_eq!(fmt_se(None), "(n/a)");
    }

    #[test]
    fn labels() {
        assert_eq!(dgp_label("X", true, ArmaSpec::new(0, 0)), "ΔX ARMA(0,0)");
        assert_eq!(dgp_label("ADS", false, ArmaSpec::new(2, 1)), "ADS ARMA(2,1)");
    }

    #[test]
    fn text_and_csv_share_cells() {
        let t = emit_table1(&[Table1Row {
            name: "polls".into(),
            differenced: true,
            spec: ArmaSpec::new(0, 0),
            arch_lm_p: 0.907,
            garch: false,
        }]);
        let csv = t.to_csv_string().unwrap();
        let text = t.to_text();
        for cell in &t.rows[0] {
            assert!(csv.contains(cell.as_str()));
            assert!(text.contains(cell.as_str()));
        }
    }
}
