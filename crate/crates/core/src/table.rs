use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Row-major feature matrix with one regression target per row.
///
/// `groups` optionally tags every row with a label (a station name, for
/// example) that travels with the row through splits but is never a feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTable {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    groups: Vec<String>,
}

impl LabeledTable {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if feature_names.is_empty() {
            return domain("a table needs at least one feature column");
        }
        if rows.len() != targets.len() {
            return domain(format!("{} feature rows but {} targets", rows.len(), targets.len()));
        }
        let k = feature_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension { expected: k, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return domain(format!("row {i} has a non-finite feature"));
            }
        }
        if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
            return domain(format!("row {i} has a non-finite target"));
        }
        Ok(Self { feature_names, rows, targets, groups: Vec::new() })
    }

    /// Builds a table with generated feature names `x0, x1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let k = rows.first().map_or(1, Vec::len);
        let names = (0..k).map(|i| format!("x{i}")).collect();
        Self::new(names, rows, targets)
    }

    pub fn with_groups(mut self, groups: Vec<String>) -> Result<Self> {
        if groups.len() != self.rows.len() {
            return domain(format!("{} group labels for {} rows", groups.len(), self.rows.len()));
        }
        self.groups = groups;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Group label per row; empty when the table carries none.
    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    /// New table holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            groups: if self.groups.is_empty() {
                Vec::new()
            } else {
                indices.iter().map(|&i| self.groups[i].clone()).collect()
            },
        }
    }

    /// Same rows with replaced targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != self.rows.len() {
            return domain("target count does not match row count");
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return domain("non-finite target");
        }
        Ok(Self { targets, ..self.clone() })
    }

    pub(crate) fn check_row(expected: usize, x: &[f64]) -> Result<()> {
        if x.len() != expected {
            return Err(Error::Dimension { expected, got: x.len() });
        }
        Ok(())
    }

    pub fn target_mean(&self) -> f64 {
        if self.targets.is_empty() {
            return 0.0;
        }
        self.targets.iter().sum::<f64>() / self.targets.len() as f64
    }
}
