//! Bagged regression trees with per-split feature subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, FeatureChoice, RegressionTree, TreeParams};
use crate::error::{domain, Result};
use crate::exec::{derive_seed, map_indexed, Parallelism};
use crate::table::LabeledTable;

/// Default mtry for regression, `ceil(k / 3)`.
pub fn default_mtry_regression(k: usize) -> usize {
    k.div_ceil(3).max(1)
}

/// Default mtry for classification, `ceil(sqrt(k))`.
pub fn default_mtry_classification(k: usize) -> usize {
    ((k as f64).sqrt().ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_leaf_size: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
    /// Draw an m-row bootstrap per tree; when false every tree sees the
    /// full sample and no out-of-bag error is available.
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn new(n_trees: usize, mtry: usize, min_leaf_size: usize, seed: u64) -> Self {
        Self { n_trees, mtry, min_leaf_size, max_depth: None, seed, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    trees: Vec<RegressionTree>,
    mtry: usize,
    bootstrap_seed: u64,
    oob_error: Option<f64>,
}

impl RandomForestModel {
    /// Assembles a forest from already-fitted trees.
    pub fn from_trees(trees: Vec<RegressionTree>, mtry: usize, bootstrap_seed: u64) -> Result<Self> {
        if trees.is_empty() {
            return domain("a forest needs at least one tree");
        }
        let k = trees[0].n_features();
        if trees.iter().any(|t| t.n_features() != k) {
            return domain("forest trees disagree on feature count");
        }
        Ok(Self { trees, mtry, bootstrap_seed, oob_error: None })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }
    pub fn mtry(&self) -> usize {
        self.mtry
    }
    pub fn bootstrap_seed(&self) -> u64 {
        self.bootstrap_seed
    }
    /// Out-of-bag mean squared error, when any row was ever out of bag.
    pub fn oob_error(&self) -> Option<f64> {
        self.oob_error
    }
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features(), x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_unchecked(x)).sum();
        sum / self.trees.len() as f64
    }
}

pub fn fit_random_forest(
    data: &LabeledTable,
    n_trees: usize,
    mtry: usize,
    min_leaf_size: usize,
    seed: u64,
) -> Result<RandomForestModel> {
    fit_forest_with(data, &ForestParams::new(n_trees, mtry, min_leaf_size, seed), Parallelism::default())
}

/// Fits a forest. Tree `t` draws its bootstrap and split features from a
/// stream seeded by `(seed, t)`, so parallel and sequential fits agree
/// bit-for-bit.
pub fn fit_forest_with(data: &LabeledTable, params: &ForestParams, mode: Parallelism) -> Result<RandomForestModel> {
    let m = data.n_rows();
    let k = data.n_features();
    if m == 0 {
        return domain("cannot fit a forest on an empty table");
    }
    if params.n_trees == 0 {
        return domain("n_trees must be at least 1");
    }
    if params.mtry == 0 || params.mtry > k {
        return domain(format!("mtry = {} must lie in 1..={k}", params.mtry));
    }
    let tree_params = TreeParams { min_leaf_size: params.min_leaf_size, max_depth: params.max_depth };
    tree_params.validate()?;

    let fitted: Vec<Result<(RegressionTree, Vec<bool>)>> = map_indexed(params.n_trees, mode, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, t as u64));
        let mut in_bag = vec![false; m];
        let samples: Vec<usize> = if params.bootstrap {
            (0..m)
                .map(|_| {
                    let i = rng.random_range(0..m);
                    in_bag[i] = true;
                    i
                })
                .collect()
        } else {
            in_bag.iter_mut().for_each(|b| *b = true);
            (0..m).collect()
        };
        let features = FeatureChoice::PerSplit { mtry: params.mtry, rng };
        let tree = grow(data, &samples, None, tree_params, features)?;
        Ok((tree, in_bag))
    });

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut bags = Vec::with_capacity(params.n_trees);
    for r in fitted {
        let (tree, bag) = r?;
        trees.push(tree);
        bags.push(bag);
    }

    let oob_error = out_of_bag_mse(data, &trees, &bags);
    Ok(RandomForestModel { trees, mtry: params.mtry, bootstrap_seed: params.seed, oob_error })
}

fn out_of_bag_mse(data: &LabeledTable, trees: &[RegressionTree], bags: &[Vec<bool>]) -> Option<f64> {
    let mut sse = 0.0;
    let mut rows = 0usize;
    for (j, x) in data.rows().iter().enumerate() {
        let (mut sum, mut count) = (0.0, 0usize);
        for (tree, bag) in trees.iter().zip(bags) {
            if !bag[j] {
                sum += tree.predict_unchecked(x);
                count += 1;
            }
        }
        if count > 0 {
            sse += (data.targets()[j] - sum / count as f64).powi(2);
            rows += 1;
        }
    }
    (rows > 0).then(|| sse / rows as f64)
}
