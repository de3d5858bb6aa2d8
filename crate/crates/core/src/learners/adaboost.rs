//! AdaBoost: the discrete two-class algorithm with threshold stumps, and a
//! regression variant (linear loss, weighted-median combination) used by the
//! QoS pipeline.

use serde::{Deserialize, Serialize};

use super::tree::{grow, FeatureChoice, RegressionTree, TreeParams};
use crate::error::{domain, Error, Result};
use crate::table::LabeledTable;

/// Error floor used to keep the vote weight finite when a stump is perfect.
pub const MIN_STUMP_ERROR: f64 = 1e-10;

const ERROR_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaBoostMode {
    BinaryClassifier,
    R2Regressor,
}

/// Depth-one threshold classifier: `+1` when `x[feature] <= threshold`,
/// `-1` otherwise, with the labels swapped when `flipped`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub flipped: bool,
}

impl Stump {
    pub fn classify(&self, x: &[f64]) -> f64 {
        let inside = x[self.feature] <= self.threshold;
        if inside != self.flipped {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeakLearner {
    Stump(Stump),
    Tree(RegressionTree),
}

impl WeakLearner {
    fn output(&self, x: &[f64]) -> f64 {
        match self {
            WeakLearner::Stump(s) => s.classify(x),
            WeakLearner::Tree(t) => t.predict_unchecked(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    mode: AdaBoostMode,
    weak_learners: Vec<WeakLearner>,
    alphas: Vec<f64>,
    /// Weighted error (classifier) or average loss (regressor) of each
    /// stored learner at the round it was fitted.
    errors: Vec<f64>,
    n_features: usize,
}

/// Per-round record of the classifier fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostRound {
    pub stump: Stump,
    pub error: f64,
    pub alpha: f64,
    pub weights_before: Vec<f64>,
    pub weights_after: Vec<f64>,
}

impl AdaBoostModel {
    /// Model from explicit learners and vote weights.
    pub fn from_parts(mode: AdaBoostMode, weak_learners: Vec<WeakLearner>, alphas: Vec<f64>, n_features: usize) -> Result<Self> {
        if weak_learners.len() != alphas.len() {
            return domain("learner and weight counts differ");
        }
        let errors = vec![f64::NAN; alphas.len()];
        Ok(Self { mode, weak_learners, alphas, errors, n_features })
    }

    pub fn mode(&self) -> AdaBoostMode {
        self.mode
    }
    pub fn weak_learners(&self) -> &[WeakLearner] {
        &self.weak_learners
    }
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features, x)?;
        Ok(self.predict_unchecked(x))
    }

    /// Weighted vote before taking the sign (classifier only meaningful).
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features, x)?;
        Ok(self.weak_learners.iter().zip(&self.alphas).map(|(h, a)| a * h.output(x)).sum())
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        match self.mode {
            AdaBoostMode::BinaryClassifier => {
                let vote: f64 = self.weak_learners.iter().zip(&self.alphas).map(|(h, a)| a * h.output(x)).sum();
                // a zero vote counts as +1
                if vote >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            AdaBoostMode::R2Regressor => {
                let mut preds: Vec<(f64, f64)> =
                    self.weak_learners.iter().zip(&self.alphas).map(|(h, &a)| (h.output(x), a)).collect();
                weighted_median(&mut preds)
            }
        }
    }
}

/// Lower weighted median: the smallest value whose cumulative weight reaches
/// half the total.
fn weighted_median(pairs: &mut [(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    for &(v, w) in pairs.iter() {
        cum += w;
        if cum >= 0.5 * total {
            return v;
        }
    }
    pairs[pairs.len() - 1].0
}

pub fn fit_adaboost_classifier(data: &LabeledTable, n_rounds: usize) -> Result<AdaBoostModel> {
    fit_adaboost_classifier_traced(data, n_rounds).map(|(m, _)| m)
}

/// Classifier fit that also returns the per-round weight distributions.
pub fn fit_adaboost_classifier_traced(data: &LabeledTable, n_rounds: usize) -> Result<(AdaBoostModel, Vec<BoostRound>)> {
    let m = data.n_rows();
    let y = data.targets();
    if y.iter().any(|&t| t != 1.0 && t != -1.0) {
        return domain("classifier targets must be exactly -1 or +1");
    }
    if m < 2 || !y.contains(&1.0) || !y.contains(&-1.0) {
        return domain("classifier needs at least two rows covering both classes");
    }
    if n_rounds == 0 {
        return domain("n_rounds must be at least 1");
    }

    let mut weights = vec![1.0 / m as f64; m];
    let mut learners = Vec::new();
    let mut alphas = Vec::new();
    let mut errors = Vec::new();
    let mut rounds = Vec::new();

    for _ in 0..n_rounds {
        let Some((stump, eps)) = best_stump(data, &weights) else {
            return Err(Error::Training("no feature offers a usable threshold".into()));
        };
        if eps == 0.5 {
            break;
        }
        let alpha = 0.5 * ((1.0 - eps.max(MIN_STUMP_ERROR)) / eps.max(MIN_STUMP_ERROR)).ln();
        let before = weights.clone();
        let unnorm: Vec<f64> = (0..m)
            .map(|j| weights[j] * (-alpha * y[j] * stump.classify(data.row(j))).exp())
            .collect();
        let z: f64 = unnorm.iter().sum();
        weights = unnorm.iter().map(|w| w / z).collect();

        learners.push(WeakLearner::Stump(stump));
        alphas.push(alpha);
        errors.push(eps);
        rounds.push(BoostRound { stump, error: eps, alpha, weights_before: before, weights_after: weights.clone() });
        if eps == 0.0 {
            break;
        }
    }

    let model = AdaBoostModel {
        mode: AdaBoostMode::BinaryClassifier,
        weak_learners: learners,
        alphas,
        errors,
        n_features: data.n_features(),
    };
    Ok((model, rounds))
}

/// Stump minimising the weighted error, with the sign flipped whenever the
/// raw error exceeds one half. Returns the post-flip error.
fn best_stump(data: &LabeledTable, weights: &[f64]) -> Option<(Stump, f64)> {
    let x = data.rows();
    let y = data.targets();
    let m = data.n_rows();
    let mut best: Option<(Stump, f64)> = None;
    let mut order: Vec<usize> = (0..m).collect();
    for f in 0..data.n_features() {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        // everything outside the region: every +1 row is misclassified
        let mut err: f64 = (0..m).filter(|&j| y[j] > 0.0).map(|j| weights[j]).sum();
        for pos in 0..m - 1 {
            let j = order[pos];
            err += if y[j] > 0.0 { -weights[j] } else { weights[j] };
            let (a, b) = (x[j][f], x[order[pos + 1]][f]);
            if a == b {
                continue;
            }
            let (eps, flipped) = if err > 0.5 { (1.0 - err, true) } else { (err.max(0.0), false) };
            if best.as_ref().is_none_or(|(_, e)| eps < e - ERROR_TIE_TOLERANCE) {
                let mut threshold = 0.5 * (a + b);
                if threshold >= b {
                    threshold = a;
                }
                best = Some((Stump { feature: f, threshold, flipped }, eps));
            }
        }
    }
    // recompute the winner's error exactly rather than from the running sum
    best.map(|(s, _)| {
        let e: f64 = (0..m).filter(|&j| s.classify(&x[j]) != y[j]).map(|j| weights[j]).sum();
        (s, e)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaR2Params {
    pub n_rounds: usize,
    pub min_leaf_size: usize,
    pub max_depth: usize,
}

impl Default for AdaR2Params {
    fn default() -> Self {
        Self { n_rounds: 50, min_leaf_size: 1, max_depth: 6 }
    }
}

pub fn fit_adaboost_r2(data: &LabeledTable, n_rounds: usize, min_leaf_size: usize) -> Result<AdaBoostModel> {
    fit_adaboost_r2_with(data, &AdaR2Params { n_rounds, min_leaf_size, ..Default::default() })
}

/// Regression boosting with linear loss. Each round fits a depth-limited
/// tree to the weighted sample, scores every row by `|error| / max |error|`,
/// and stops once the weighted average loss reaches one half.
pub fn fit_adaboost_r2_with(data: &LabeledTable, params: &AdaR2Params) -> Result<AdaBoostModel> {
    let m = data.n_rows();
    if m < 2 {
        return domain("regression boosting needs at least two rows");
    }
    if params.n_rounds == 0 {
        return domain("n_rounds must be at least 1");
    }
    let tree_params = TreeParams::new(params.min_leaf_size).with_max_depth(params.max_depth);
    tree_params.validate()?;
    let samples: Vec<usize> = (0..m).collect();
    let y = data.targets();

    let mut weights = vec![1.0 / m as f64; m];
    let mut learners = Vec::new();
    let mut alphas = Vec::new();
    let mut errors = Vec::new();

    for round in 0..params.n_rounds {
        let tree = grow(data, &samples, Some(&weights), tree_params, FeatureChoice::All)?;
        let abs_err: Vec<f64> = (0..m).map(|j| (tree.predict_unchecked(data.row(j)) - y[j]).abs()).collect();
        let max_err = abs_err.iter().cloned().fold(0.0, f64::max);
        if max_err == 0.0 {
            learners.push(WeakLearner::Tree(tree));
            alphas.push(1.0);
            errors.push(0.0);
            break;
        }
        let loss: Vec<f64> = abs_err.iter().map(|e| e / max_err).collect();
        let avg: f64 = weights.iter().zip(&loss).map(|(w, l)| w * l).sum();
        if avg >= 0.5 {
            if round == 0 {
                return Err(Error::Training(format!("first boosting round has average loss {avg:.4} >= 0.5")));
            }
            break;
        }
        if avg <= 0.0 {
            learners.push(WeakLearner::Tree(tree));
            alphas.push(1.0);
            errors.push(0.0);
            break;
        }
        let beta = avg / (1.0 - avg);
        for (w, l) in weights.iter_mut().zip(&loss) {
            *w *= beta.powf(1.0 - l);
        }
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);

        learners.push(WeakLearner::Tree(tree));
        alphas.push((1.0 / beta).ln());
        errors.push(avg);
    }

    Ok(AdaBoostModel {
        mode: AdaBoostMode::R2Regressor,
        weak_learners: learners,
        alphas,
        errors,
        n_features: data.n_features(),
    })
}
