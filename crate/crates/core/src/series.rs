//! Plain real-valued time series with optional provenance.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// An ordered real-valued sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<NaiveDate>>,
    /// Free-form provenance (generator spec, seed, source file, fallbacks...).
    pub meta: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            timestamps: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Vec<NaiveDate>) -> Result<Self> {
        if values.len() != timestamps.len() {
            return Err(Error::Contract(format!(
                "{} values but {} timestamps",
                values.len(),
                timestamps.len()
            )));
        }
        Ok(Self {
            values,
            timestamps: Some(timestamps),
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[NaiveDate]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// First `n` observations as a new series (metadata is kept).
    pub fn head(&self, n: usize) -> TimeSeries {
        let n = n.min(self.len());
        TimeSeries {
            values: self.values[..n].to_vec(),
            timestamps: self.timestamps.as_ref().map(|t| t[..n].to_vec()),
            meta: self.meta.clone(),
        }
    }

    /// Reads a series from CSV. Lines starting with `#` are skipped, the first
    /// remaining line is a header. `column` selects a named column, otherwise
    /// the last column is used.
    pub fn read_csv(path: &Path, column: Option<&str>) -> Result<TimeSeries> {
        let mut text = String::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        let mut ts = Self::parse_csv(&text, column)?;
        ts.meta
            .insert("source".to_string(), path.display().to_string());
        Ok(ts)
    }

    pub fn parse_csv(text: &str, column: Option<&str>) -> Result<TimeSeries> {
        let body: String = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::Data(e.to_string()))?
            .clone();
        if headers.is_empty() {
            return Err(Error::Data("missing header row".into()));
        }
        let idx = match column {
            Some(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::Data(format!(
                    "column '{name}' not found; available: {}",
                    headers.iter().collect::<Vec<_>>().join(", ")
                ))
            })?,
            None => headers.len() - 1,
        };
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
            let field = rec.get(idx).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| {
                Error::Data(format!("row {}: cannot parse '{field}' as a number", row + 1))
            })?;
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Data("no observations".into()));
        }
        Ok(TimeSeries::new(values))
    }
}

impl From<Vec<f64>> for TimeSeries {
    fn from(values: Vec<f64>) -> Self {
        TimeSeries::new(values)
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn demean(x: &[f64]) -> (Vec<f64>, f64) {
    let m = mean(x);
    (x.iter().map(|v| v - m).collect(), m)
}
