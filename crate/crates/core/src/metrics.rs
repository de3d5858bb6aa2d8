//! Regression error statistics and the per-model, per-location report table.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Error statistics of predictions against actual values. `mape` is a
/// fraction and is `None` when an actual value is zero; `r2` is `None` when
/// the actual values have no variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    pub mape: Option<f64>,
    pub rmse: f64,
    pub r2: Option<f64>,
}

pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<MetricReport> {
    if actual.len() != predicted.len() {
        return domain(format!("{} actual values but {} predictions", actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return domain("metrics need at least one pair");
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return domain("metrics need finite values");
    }
    let n = actual.len() as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    let mut sape = 0.0;
    let mut mape_defined = true;
    for (a, p) in actual.iter().zip(predicted) {
        let d = a - p;
        sse += d * d;
        sae += d.abs();
        if *a == 0.0 {
            mape_defined = false;
        } else {
            sape += (d / a).abs();
        }
    }
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    let mse = sse / n;
    Ok(MetricReport {
        n: actual.len(),
        mse,
        mae: sae / n,
        mape: mape_defined.then(|| sape / n),
        rmse: mse.sqrt(),
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
    })
}

/// One line of the report table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub location: String,
    pub n: usize,
    #[serde(rename = "MSE")]
    pub mse: f64,
    #[serde(rename = "MAE")]
    pub mae: f64,
    #[serde(rename = "MAPE")]
    pub mape: Option<f64>,
    #[serde(rename = "RMSE")]
    pub rmse: f64,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
}

pub const METRIC_COLUMNS: [&str; 8] = ["model", "location", "n", "MSE", "MAE", "MAPE", "RMSE", "R2"];

impl MetricRow {
    pub fn new(model: impl Into<String>, location: impl Into<String>, r: &MetricReport) -> Self {
        Self {
            model: model.into(),
            location: location.into(),
            n: r.n,
            mse: r.mse,
            mae: r.mae,
            mape: r.mape,
            rmse: r.rmse,
            r2: r.r2,
        }
    }
}

/// Writes the table with a header; undefined statistics are empty fields.
pub fn write_metrics_csv<W: Write>(w: W, rows: &[MetricRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(METRIC_COLUMNS)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: Read>(r: R) -> Result<Vec<MetricRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != METRIC_COLUMNS {
        return Err(Error::Schema(format!("metrics header {header:?} does not match {METRIC_COLUMNS:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
