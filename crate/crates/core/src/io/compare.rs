use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A `diagnostics.csv` table: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DiagnosticsTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| Error::Compare(format!("{}: {e}", path.display())))?;
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if columns.first().map(String::as_str) != Some("step") || columns.get(1).map(String::as_str) != Some("time") {
            return Err(Error::Compare(format!(
                "{}: expected `step,time,...` header",
                path.display()
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::Compare(format!("{} row {}: `{s}` is not a number", path.display(), i + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(DiagnosticsTable { columns, rows })
    }

    /// Reads `<dir>/diagnostics.csv`.
    pub fn read_run(dir: &Path) -> Result<Self> {
        DiagnosticsTable::read(&dir.join("diagnostics.csv"))
    }
}

/// Row-aligned join of two runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Compared columns, excluding `step` and `time`.
    pub columns: Vec<String>,
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    /// Per row, `(a, b)` for every compared column.
    pub values: Vec<Vec<(f64, f64)>>,
}

/// Joins two tables on `(step, time)`. The step grids must coincide.
pub fn compare_tables(a: &DiagnosticsTable, b: &DiagnosticsTable) -> Result<Comparison> {
    if a.columns != b.columns {
        return Err(Error::Compare(format!(
            "column sets differ: [{}] vs [{}]",
            a.columns.join(","),
            b.columns.join(",")
        )));
    }
    if a.rows.len() != b.rows.len() {
        return Err(Error::Compare(format!(
            "step grids differ: {} rows vs {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let mut steps = Vec::with_capacity(a.rows.len());
    let mut times = Vec::with_capacity(a.rows.len());
    let mut values = Vec::with_capacity(a.rows.len());
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let (ta, tb) = (ra[1], rb[1]);
        if ra[0] != rb[0] || (ta - tb).abs() > 1e-12 * ta.abs().max(tb.abs()).max(1e-300) {
            return Err(Error::Compare(format!(
                "step grids differ: (step {}, t = {ta:e}) vs (step {}, t = {tb:e})",
                ra[0], rb[0]
            )));
        }
        steps.push(ra[0] as u64);
        times.push(ta);
        values.push(ra[2..].iter().copied().zip(rb[2..].iter().copied()).collect());
    }
    Ok(Comparison {
        columns: a.columns[2..].to_vec(),
        steps,
        times,
        values,
    })
}

/// `b − a`, with two NaNs (a quantity undefined in both runs) counting as equal.
pub fn delta(a: f64, b: f64) -> f64 {
    if a.is_nan() && b.is_nan() {
        0.0
    } else {
        b - a
    }
}

/// Compares the `diagnostics.csv` of two run directories.
pub fn compare(dir_a: &Path, dir_b: &Path) -> Result<Comparison> {
    compare_tables(&DiagnosticsTable::read_run(dir_a)?, &DiagnosticsTable::read_run(dir_b)?)
}

impl Comparison {
    /// `b − a` of `column` on the last row.
    pub fn final_delta(&self, column: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == column)?;
        let (a, b) = self.values.last()?[j];
        Some(delta(a, b))
    }

    /// Largest `|b − a|` per column; NaN when one side alone is NaN somewhere.
    pub fn max_abs_deltas(&self) -> Vec<(String, f64)> {
        self.columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let m = self
                    .values
                    .iter()
                    .map(|row| delta(row[j].0, row[j].1).abs())
                    .fold(0.0, |m: f64, d| {
                        if m.is_nan() || d.is_nan() {
                            f64::NAN
                        } else {
                            m.max(d)
                        }
                    });
                (c.clone(), m)
            })
            .collect()
    }

    /// `step,time,<c>_a,<c>_b,<c>_delta,...` with `delta = b − a`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "time".to_string()];
        for c in &self.columns {
            header.extend([format!("{c}_a"), format!("{c}_b"), format!("{c}_delta")]);
        }
        w.write_record(&header)?;
        for ((step, time), row) in self.steps.iter().zip(&self.times).zip(&self.values) {
            let mut rec = vec![step.to_string(), format!("{time:.16e}")];
            for (a, b) in row {
                rec.extend([format!("{a:.16e}"), format!("{b:.16e}"), format!("{:.16e}", delta(*a, *b))]);
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
