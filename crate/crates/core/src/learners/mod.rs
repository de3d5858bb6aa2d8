//! From-scratch tree learners and tree ensembles.

pub mod adaboost;
pub mod forest;
pub mod gbr;
pub mod tree;

pub use adaboost::{
    fit_adaboost_classifier, fit_adaboost_classifier_traced, fit_adaboost_r2, fit_adaboost_r2_with, AdaBoostMode,
    AdaBoostModel, AdaR2Params, BoostRound, Stump, WeakLearner,
};
pub use forest::{
    default_mtry_classification, default_mtry_regression, fit_forest_with, fit_random_forest, ForestParams,
    RandomForestModel,
};
pub use gbr::{fit_gbr_with, fit_gradient_boost, GbrParams, GradientBoostModel};
pub use tree::{fit_regression_tree, fit_tree_with, Node, RegressionTree, TreeParams, SPLIT_TIE_TOLERANCE};
