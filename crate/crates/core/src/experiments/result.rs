//! Tabular sweep output and its aggregates.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One evaluated point: key columns, seed and RMSE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Values of the key columns, formatted as they appear in the CSV.
    pub key: Vec<String>,
    pub seed: u64,
    pub rmse: f64,
}

/// Median, minimum and maximum RMSE over the seeds of one key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub key: Vec<String>,
    pub count: usize,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Names of the key columns, in CSV order.
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Median of a non-empty slice; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl SweepResult {
    pub fn new(columns: Vec<String>, rows: Vec<SweepRow>) -> Self {
        Self { columns, rows }
    }

    /// Full CSV header: key columns, `seed`, `rmse`.
    pub fn header(&self) -> Vec<String> {
        let mut h = self.columns.clone();
        h.push("seed".into());
        h.push("rmse".into());
        h
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// RMSE values of rows matching every `(column, value)` pair, in row order.
    pub fn select(&self, filter: &[(&str, &str)]) -> Vec<f64> {
        let idx: Vec<(Option<usize>, &str)> = filter.iter().map(|(c, v)| (self.column(c), *v)).collect();
        self.rows
            .iter()
            .filter(|r| idx.iter().all(|(i, v)| i.is_some_and(|i| r.key[i] == *v)))
            .map(|r| r.rmse)
            .collect()
    }

    /// Median RMSE of the matching rows, `None` if nothing matches.
    pub fn median_where(&self, filter: &[(&str, &str)]) -> Option<f64> {
        let v = self.select(filter);
        (!v.is_empty()).then(|| median(&v))
    }

    /// One aggregate per distinct key, in order of first appearance.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut keys: Vec<&Vec<String>> = Vec::new();
        for r in &self.rows {
            if !keys.contains(&&r.key) {
                keys.push(&r.key);
            }
        }
        keys.into_iter()
            .map(|k| {
                let v: Vec<f64> = self.rows.iter().filter(|r| &r.key == k).map(|r| r.rmse).collect();
                Aggregate {
                    key: k.clone(),
                    count: v.len(),
                    median: median(&v),
                    min: v.iter().cloned().fold(f64::INFINITY, f64::min),
                    max: v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect()
    }

    fn csv_bytes<F>(&self, header: Vec<String>, mut body: F) -> Result<String>
    where
        F: FnMut(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).map_err(|e| Error::Output(e.to_string()))?;
        body(&mut w).map_err(|e| Error::Output(e.to_string()))?;
        let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))
    }

    /// Raw rows as CSV. Floats use the shortest round-trip representation.
    pub fn to_csv(&self) -> Result<String> {
        self.csv_bytes(self.header(), |w| {
            for r in &self.rows {
                let mut rec = r.key.clone();
                rec.push(r.seed.to_string());
                rec.push(r.rmse.to_string());
                w.write_record(&rec)?;
            }
            Ok(())
        })
    }

    /// Aggregates as CSV: key columns, `count`, `median`, `min`, `max`.
    pub fn aggregate_csv(&self) -> Result<String> {
        let mut header = self.columns.clone();
        header.extend(["count", "median", "min", "max"].map(String::from));
        let aggs = self.aggregates();
        self.csv_bytes(header, |w| {
            for a in &aggs {
                let mut rec = a.key.clone();
                rec.extend([a.count.to_string(), a.median.to_string(), a.min.to_string(), a.max.to_string()]);
                w.write_record(&rec)?;
            }
            Ok(())
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let text = self.to_csv()?;
        std::fs::write(path, text).map_err(|e| Error::Output(format!("{}: {e}", path.display())))
    }
}
