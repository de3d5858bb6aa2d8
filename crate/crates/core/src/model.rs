//! Uniform handles over every learner: a descriptor that can be fitted, the
//! fitted model it produces, and the JSON file format models are stored in.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::Parallelism;
use crate::learners::{
    default_mtry_regression, fit_adaboost_r2_with, fit_forest_with, fit_gbr_with, fit_tree_with, AdaBoostModel,
    AdaR2Params, ForestParams, GbrParams, GradientBoostModel, RandomForestModel, RegressionTree, TreeParams,
};
use crate::neural::{MLPModel, MlpSpec};
use crate::stacking::{fit_stacked, StackConfig, StackedModel};
use crate::table::LabeledTable;

/// Anything that maps a feature vector to a real prediction.
pub trait Regressor {
    fn n_features(&self) -> usize;

    /// Prediction without the dimension check.
    fn predict_row(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features(), x)?;
        Ok(self.predict_row(x))
    }

    fn predict_table(&self, data: &LabeledTable) -> Result<Vec<f64>> {
        if data.n_features() != self.n_features() {
            return Err(Error::Dimension { expected: self.n_features(), got: data.n_features() });
        }
        Ok(data.rows().iter().map(|x| self.predict_row(x)).collect())
    }
}

/// A recipe that turns a table into a fitted model.
pub trait Learner: Sync {
    fn name(&self) -> String;
    fn fit(&self, data: &LabeledTable, mode: Parallelism) -> Result<FittedModel>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "kebab-case")]
pub enum LearnerSpec {
    /// Predicts the training-target mean.
    Mean,
    Tree {
        min_leaf_size: usize,
        #[serde(default)]
        max_depth: Option<usize>,
    },
    Forest {
        n_trees: usize,
        /// `None` picks `ceil(k/3)` at fit time.
        #[serde(default)]
        mtry: Option<usize>,
        min_leaf_size: usize,
        #[serde(default)]
        max_depth: Option<usize>,
        seed: u64,
    },
    Gbr {
        n_trees: usize,
        learning_rate: f64,
        min_leaf_size: usize,
        #[serde(default)]
        max_depth: Option<usize>,
    },
    #[serde(rename = "adbr-r2")]
    AdaR2 {
        n_rounds: usize,
        min_leaf_size: usize,
        max_depth: usize,
    },
    Mlp(MlpSpec),
    Stacked(StackConfig),
}

impl LearnerSpec {
    pub fn tree(min_leaf_size: usize) -> Self {
        Self::Tree { min_leaf_size, max_depth: None }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Tree { .. } => "tree",
            Self::Forest { .. } => "forest",
            Self::Gbr { .. } => "gbr",
            Self::AdaR2 { .. } => "adbr-r2",
            Self::Mlp(_) => "mlp",
            Self::Stacked(_) => "stacked",
        }
    }
}

impl Learner for LearnerSpec {
    fn name(&self) -> String {
        self.kind().to_string()
    }

    fn fit(&self, data: &LabeledTable, mode: Parallelism) -> Result<FittedModel> {
        if data.is_empty() {
            return domain(format!("cannot fit {} on an empty table", self.kind()));
        }
        Ok(match self {
            Self::Mean => FittedModel::Constant { value: data.target_mean(), n_features: data.n_features() },
            Self::Tree { min_leaf_size, max_depth } => {
                FittedModel::Tree(fit_tree_with(data, TreeParams { min_leaf_size: *min_leaf_size, max_depth: *max_depth })?)
            }
            Self::Forest { n_trees, mtry, min_leaf_size, max_depth, seed } => {
                let params = ForestParams {
                    n_trees: *n_trees,
                    mtry: mtry.unwrap_or_else(|| default_mtry_regression(data.n_features())),
                    min_leaf_size: *min_leaf_size,
                    max_depth: *max_depth,
                    seed: *seed,
                    bootstrap: true,
                };
                FittedModel::Forest(fit_forest_with(data, &params, mode)?)
            }
            Self::Gbr { n_trees, learning_rate, min_leaf_size, max_depth } => {
                let params = GbrParams {
                    n_trees: *n_trees,
                    learning_rate: *learning_rate,
                    min_leaf_size: *min_leaf_size,
                    max_depth: *max_depth,
                };
                FittedModel::Gbr(fit_gbr_with(data, &params)?)
            }
            Self::AdaR2 { n_rounds, min_leaf_size, max_depth } => {
                let params = AdaR2Params { n_rounds: *n_rounds, min_leaf_size: *min_leaf_size, max_depth: *max_depth };
                FittedModel::AdaBoost(fit_adaboost_r2_with(data, &params)?)
            }
            Self::Mlp(spec) => FittedModel::Mlp(spec.fit(data)?.model),
            Self::Stacked(cfg) => FittedModel::Stacked(Box::new(fit_stacked(data, cfg, mode)?)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedModel {
    Constant { value: f64, n_features: usize },
    Tree(RegressionTree),
    Forest(RandomForestModel),
    Gbr(GradientBoostModel),
    AdaBoost(AdaBoostModel),
    Mlp(MLPModel),
    Stacked(Box<StackedModel>),
}

impl Regressor for FittedModel {
    fn n_features(&self) -> usize {
        match self {
            Self::Constant { n_features, .. } => *n_features,
            Self::Tree(m) => m.n_features(),
            Self::Forest(m) => m.n_features(),
            Self::Gbr(m) => m.n_features(),
            Self::AdaBoost(m) => m.n_features(),
            Self::Mlp(m) => m.n_inputs(),
            Self::Stacked(m) => m.n_features(),
        }
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { value, .. } => *value,
            Self::Tree(m) => m.predict_unchecked(x),
            Self::Forest(m) => m.predict_unchecked(x),
            Self::Gbr(m) => m.predict_unchecked(x),
            Self::AdaBoost(m) => m.predict_unchecked(x),
            Self::Mlp(m) => m.forward_unchecked(x),
            Self::Stacked(m) => m.predict_unchecked(x),
        }
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model: the fitted parameters plus enough context to check that
/// a feature file matches what the model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub name: String,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub spec: LearnerSpec,
    pub model: FittedModel,
}

impl ModelFile {
    pub fn new(name: impl Into<String>, feature_names: Vec<String>, seed: u64, spec: LearnerSpec, model: FittedModel) -> Self {
        Self { format_version: MODEL_FORMAT_VERSION, name: name.into(), feature_names, seed, spec, model }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    /// Reads a model file. Unpruned trees can nest deeper than the parser's
    /// default recursion limit, so the limit is lifted.
    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_reader(r);
        de.disable_recursion_limit();
        let file: Self = Deserialize::deserialize(&mut de)?;
        de.end()?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.feature_names.len() != file.model.n_features() {
            return Err(Error::Schema("feature names disagree with the model's input size".into()));
        }
        Ok(file)
    }

    /// Refuses a feature header that is not exactly the training header.
    pub fn check_header(&self, header: &[String]) -> Result<()> {
        if header != self.feature_names.as_slice() {
            return Err(Error::Schema(format!(
                "feature columns {:?} do not match the model's {:?}",
                header, self.feature_names
            )));
        }
        Ok(())
    }
}
