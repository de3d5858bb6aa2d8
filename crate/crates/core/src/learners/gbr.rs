//! Gradient boosting under squared-error loss.
//!
//! The initial constant is the target mean. Each stage fits a tree to the
//! current residuals, which are the negative gradient of `½(y - F)²`; with
//! squared loss the optimal terminal value of a region is its mean residual,
//! which is what the tree leaves already hold. Stage outputs are shrunk by the
//! learning rate.

use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_with, RegressionTree, TreeParams};
use crate::error::{domain, Result};
use crate::table::LabeledTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbrParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub min_leaf_size: usize,
    pub max_depth: Option<usize>,
}

impl GbrParams {
    pub fn new(n_trees: usize, learning_rate: f64, min_leaf_size: usize) -> Self {
        Self { n_trees, learning_rate, min_leaf_size, max_depth: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostModel {
    init_value: f64,
    trees: Vec<RegressionTree>,
    learning_rate: f64,
    n_features: usize,
}

impl GradientBoostModel {
    pub fn init_value(&self) -> f64 {
        self.init_value
    }
    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }
    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features, x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.staged_predict_unchecked(x).last().copied().unwrap_or(self.init_value)
    }

    /// Prediction after stages `0..=n` (entry 0 is the initial constant).
    pub fn staged_predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        LabeledTable::check_row(self.n_features, x)?;
        Ok(self.staged_predict_unchecked(x))
    }

    fn staged_predict_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.trees.len() + 1);
        let mut f = self.init_value;
        out.push(f);
        for t in &self.trees {
            f += self.learning_rate * t.predict_unchecked(x);
            out.push(f);
        }
        out
    }
}

pub fn fit_gradient_boost(
    data: &LabeledTable,
    n_trees: usize,
    learning_rate: f64,
    min_leaf_size: usize,
) -> Result<GradientBoostModel> {
    fit_gbr_with(data, &GbrParams::new(n_trees, learning_rate, min_leaf_size))
}

pub fn fit_gbr_with(data: &LabeledTable, params: &GbrParams) -> Result<GradientBoostModel> {
    if !(params.learning_rate > 0.0 && params.learning_rate < 1.0) {
        return domain(format!("learning rate must lie in (0, 1), got {}", params.learning_rate));
    }
    if data.is_empty() {
        return domain("cannot boost on an empty table");
    }
    let tree_params = TreeParams { min_leaf_size: params.min_leaf_size, max_depth: params.max_depth };
    tree_params.validate()?;

    let init_value = data.target_mean();
    let mut current = vec![init_value; data.n_rows()];
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let residuals: Vec<f64> = data.targets().iter().zip(&current).map(|(y, f)| y - f).collect();
        let stage = fit_tree_with(&data.with_targets(residuals)?, tree_params)?;
        for (f, x) in current.iter_mut().zip(data.rows()) {
            *f += params.learning_rate * stage.predict_unchecked(x);
        }
        trees.push(stage);
    }
    Ok(GradientBoostModel { init_value, trees, learning_rate: params.learning_rate, n_features: data.n_features() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ten_points() -> LabeledTable {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let ys = [1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 9.0, 7.0, 8.0, 10.0];
        LabeledTable::from_rows(xs.iter().map(|&x| vec![x]).collect(), ys.to_vec()).unwrap()
    }

    #[test]
    fn zero_stages_predicts_mean() {
        let data = ten_points();
        let m = fit_gradient_boost(&data, 0, 0.5, 1).unwrap();
        assert_eq!(m.predict(&[3.0]).unwrap(), 5.5);
        assert_eq!(m.predict(&[-100.0]).unwrap(), 5.5);
    }

    #[test]
    fn constant_targets_stay_constant() {
        let rows = (0..6).map(|i| vec![i as f64]).collect();
        let data = LabeledTable::from_rows(rows, vec![2.5; 6]).unwrap();
        let m = fit_gradient_boost(&data, 5, 0.3, 1).unwrap();
        for t in m.trees() {
            assert_eq!(t.n_leaves(), 1);
        }
        assert_eq!(m.predict(&[1.0]).unwrap(), 2.5);
    }

    #[test]
    fn fits_ten_points() {
        let data = ten_points();
        let m = fit_gradient_boost(&data, 50, 0.5, 1).unwrap();
        let mse: f64 = data
            .rows()
            .iter()
            .zip(data.targets())
            .map(|(x, y)| (m.predict(x).unwrap() - y).powi(2))
            .sum::<f64>()
            / 10.0;
        assert!(mse < 1e-4, "{mse}");
    }

    #[test]
    fn staging_adds_shrunk_tree_output() {
        let data = ten_points();
        let params = GbrParams { max_depth: Some(2), ..GbrParams::new(8, 0.3, 1) };
        let m = fit_gbr_with(&data, &params).unwrap();
        let x = [4.5];
        let staged = m.staged_predict(&x).unwrap();
        for n in 1..staged.len() {
            let expect = staged[n - 1] + 0.3 * m.trees()[n - 1].predict(&x).unwrap();
            assert_eq!(staged[n], expect);
        }
        assert_eq!(*staged.last().unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn learning_rate_bounds() {
        let data = ten_points();
        assert!(fit_gradient_boost(&data, 3, 0.0, 1).is_err());
        assert!(fit_gradient_boost(&data, 3, 1.0, 1).is_err());
        assert!(m_dim_err(&data));
    }

    fn m_dim_err(data: &LabeledTable) -> bool {
        let m = fit_gradient_boost(data, 2, 0.5, 1).unwrap();
        m.predict(&[1.0, 2.0]).is_err()
    }
}
