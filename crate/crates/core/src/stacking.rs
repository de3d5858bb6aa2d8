//! Stacked generalization with a simplex-constrained linear combiner.
//!
//! Each base learner is cross-fitted over `H` folds to produce out-of-fold
//! predictions (the level-1 sample). The combining weights minimise the
//! squared error of `Σ U_l F_l` subject to `U ≥ 0, Σ U = 1`, and the final
//! base learners are refitted on every row.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::model::{FittedModel, Learner, LearnerSpec, Regressor};
use crate::table::LabeledTable;

pub const DEFAULT_FOLDS: usize = 5;
pub const MAX_WEIGHT_ITERATIONS: usize = 10_000;
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub base_learners: Vec<LearnerSpec>,
    pub n_folds: usize,
    pub seed: u64,
}

impl StackConfig {
    pub fn new(base_learners: Vec<LearnerSpec>, seed: u64) -> Self {
        Self { base_learners, n_folds: DEFAULT_FOLDS, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    base: Vec<FittedModel>,
    names: Vec<String>,
    weights: Vec<f64>,
}

impl StackedModel {
    pub fn new(base: Vec<FittedModel>, names: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if base.is_empty() || base.len() != weights.len() || names.len() != base.len() {
            return domain("a stack needs one name and one weight per base model");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return domain(format!("stacking weights {weights:?} are not on the simplex"));
        }
        let k = base[0].n_features();
        if base.iter().any(|b| b.n_features() != k) {
            return domain("base models disagree on feature count");
        }
        Ok(Self { base, names, weights })
    }

    pub fn base_models(&self) -> &[FittedModel] {
        &self.base
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn n_features(&self) -> usize {
        self.base[0].n_features()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features(), x)?;
        Ok(self.predict_unchecked(x))
    }

    /// Weighted sum, clamped to the span of the base predictions so rounding
    /// can never push it outside.
    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for (m, w) in self.base.iter().zip(&self.weights) {
            let p = m.predict_row(x);
            lo = lo.min(p);
            hi = hi.max(p);
            sum += w * p;
        }
        sum.clamp(lo, hi)
    }
}

pub fn predict_stacked(model: &StackedModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Shuffles `0..m` with `seed` and deals it round-robin into `h` folds, so
/// fold sizes differ by at most one.
pub fn kfold_partition(m: usize, h: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if h < 2 {
        return domain(format!("need at least two folds, got {h}"));
    }
    if h > m {
        return domain(format!("{h} folds exceed {m} rows"));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(m / h + 1); h];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % h].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn build_level1_sample(data: &LabeledTable, cfg: &StackConfig, mode: Parallelism) -> Result<LabeledTable> {
    build_level1_with(data, &cfg.base_learners, cfg.n_folds, cfg.seed, mode)
}

/// Out-of-fold predictions: column `l`, row `j` comes from learner `l`
/// trained on every fold except the one holding `j`.
pub fn build_level1_with<L: Learner>(
    data: &LabeledTable,
    learners: &[L],
    n_folds: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<LabeledTable> {
    if learners.is_empty() {
        return domain("stacking needs at least one base learner");
    }
    let m = data.n_rows();
    let folds = kfold_partition(m, n_folds, seed)?;
    let n_learners = learners.len();

    let tasks = map_indexed(n_folds * n_learners, mode, |t| {
        let (h, l) = (t / n_learners, t % n_learners);
        let held_out = &folds[h];
        let train_idx: Vec<usize> =
            folds.iter().enumerate().filter(|(g, _)| *g != h).flat_map(|(_, f)| f.iter().copied()).collect();
        let model = learners[l]
            .fit(&data.subset(&train_idx), mode)
            .map_err(|e| Error::Training(format!("fold {h}, learner {} ({l}): {e}", learners[l].name())))?;
        Ok::<_, Error>(held_out.iter().map(|&j| (j, model.predict_row(data.row(j)))).collect::<Vec<_>>())
    });

    let mut rows = vec![vec![0.0; n_learners]; m];
    for (t, preds) in tasks.into_iter().enumerate() {
        let l = t % n_learners;
        for (j, p) in preds? {
            rows[j][l] = p;
        }
    }
    let names = level1_names(learners);
    let level1 = LabeledTable::new(names, rows, data.targets().to_vec())
        .map_err(|e| Error::Training(format!("level-1 sample: {e}")))?;
    if data.groups().is_empty() {
        Ok(level1)
    } else {
        level1.with_groups(data.groups().to_vec())
    }
}

fn level1_names<L: Learner>(learners: &[L]) -> Vec<String> {
    let raw: Vec<String> = learners.iter().map(Learner::name).collect();
    raw.iter()
        .enumerate()
        .map(|(i, n)| if raw.iter().filter(|o| *o == n).count() > 1 { format!("{n}#{i}") } else { n.clone() })
        .collect()
}

/// `Σ_j (y_j - Σ_l U_l F_jl)²`.
pub fn stacking_objective(level1: &LabeledTable, weights: &[f64]) -> f64 {
    level1
        .rows()
        .iter()
        .zip(level1.targets())
        .map(|(f, y)| {
            let fit: f64 = f.iter().zip(weights).map(|(a, b)| a * b).sum();
            (y - fit).powi(2)
        })
        .sum()
}

/// Euclidean projection onto `{u ≥ 0, Σu = 1}` by the sorting construction.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn largest_eigenvalue(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w: Vec<f64> = g.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-12 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// Simplex-constrained least-squares weights by projected gradient with
/// step `1/Λ`, `Λ` a power-iteration bound on the gradient's Lipschitz
/// constant. Starts from the best single column and returns the best
/// iterate seen, so the result never loses to any single learner.
pub fn solve_stacking_weights(level1: &LabeledTable) -> Result<Vec<f64>> {
    if level1.is_empty() {
        return domain("level-1 sample is empty");
    }
    let l = level1.n_features();
    let f = level1.rows();
    let y = level1.targets();

    let mut gram = vec![vec![0.0; l]; l];
    let mut fty = vec![0.0; l];
    for (row, yj) in f.iter().zip(y) {
        for a in 0..l {
            fty[a] += row[a] * yj;
            for b in 0..l {
                gram[a][b] += row[a] * row[b];
            }
        }
    }
    if gram.iter().flatten().chain(&fty).any(|v| !v.is_finite()) {
        return domain("level-1 sample produces non-finite normal equations");
    }
    if l == 1 {
        return Ok(vec![1.0]);
    }

    let vertex = |i: usize| {
        let mut w = vec![0.0; l];
        w[i] = 1.0;
        w
    };
    let mut best = (0..l).map(|i| (stacking_objective(level1, &vertex(i)), vertex(i))).min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();

    let lipschitz = 2.0 * largest_eigenvalue(&gram) * 1.05;
    if lipschitz == 0.0 {
        return Ok(best.1);
    }
    let step = 1.0 / lipschitz;
    let mut w = best.1.clone();
    let mut obj = best.0;
    for _ in 0..MAX_WEIGHT_ITERATIONS {
        // gradient 2(Gw - Fᵀy)
        let grad: Vec<f64> =
            (0..l).map(|a| 2.0 * (gram[a].iter().zip(&w).map(|(g, wi)| g * wi).sum::<f64>() - fty[a])).collect();
        let next: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - step * gi).collect();
        w = project_to_simplex(&next);
        let new_obj = stacking_objective(level1, &w);
        if new_obj < best.0 {
            best = (new_obj, w.clone());
        }
        let done = (obj - new_obj).abs() < WEIGHT_TOLERANCE * obj.max(1.0);
        obj = new_obj;
        if done {
            break;
        }
    }
    Ok(best.1)
}

/// Builds the level-1 sample, solves the weights, and refits every base
/// learner on the full table.
pub fn fit_stacked(data: &LabeledTable, cfg: &StackConfig, mode: Parallelism) -> Result<StackedModel> {
    let level1 = build_level1_sample(data, cfg, mode)?;
    let weights = solve_stacking_weights(&level1)?;
    let base = map_indexed(cfg.base_learners.len(), mode, |l| cfg.base_learners[l].fit(data, mode))
        .into_iter()
        .enumerate()
        .map(|(l, r)| r.map_err(|e| Error::Training(format!("final fit of learner {l}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    StackedModel::new(base, level1.feature_names().to_vec(), weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_sizes() {
        let f = kfold_partition(10, 5, 1).unwrap();
        assert!(f.iter().all(|s| s.len() == 2));
        let mut sizes: Vec<usize> = kfold_partition(10, 3, 1).unwrap().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        let mut all: Vec<usize> = kfold_partition(17, 4, 9).unwrap().concat();
        all.sort_unstable();
        assert_eq!(all, (0..17).collect::<Vec<_>>());
        assert!(kfold_partition(3, 4, 0).is_err());
        assert!(kfold_partition(3, 1, 0).is_err());
        assert_eq!(kfold_partition(20, 4, 5).unwrap(), kfold_partition(20, 4, 5).unwrap());
    }

    struct Zero;
    impl Learner for Zero {
        fn name(&self) -> String {
            "zero".into()
        }
        fn fit(&self, data: &LabeledTable, _: Parallelism) -> Result<FittedModel> {
            Ok(FittedModel::Constant { value: 0.0, n_features: data.n_features() })
        }
    }

    fn six_rows() -> LabeledTable {
        LabeledTable::from_rows((0..6).map(|i| vec![i as f64]).collect(), vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]).unwrap()
    }

    #[test]
    fn zero_learner_gives_zero_column() {
        let l1 = build_level1_with(&six_rows(), &[Zero], 3, 0, Parallelism::Sequential).unwrap();
        assert_eq!(l1.n_rows(), 6);
        assert_eq!(l1.n_features(), 1);
        assert!(l1.rows().iter().all(|r| r == &[0.0]));
        assert_eq!(l1.targets(), six_rows().targets());
    }

    #[test]
    fn mean_learner_uses_other_fold() {
        let data = six_rows();
        let folds = kfold_partition(6, 2, 4).unwrap();
        let l1 = build_level1_with(&data, &[LearnerSpec::Mean], 2, 4, Parallelism::Sequential).unwrap();
        for (h, fold) in folds.iter().enumerate() {
            let other = &folds[1 - h];
            let mean = other.iter().map(|&i| data.targets()[i]).sum::<f64>() / other.len() as f64;
            for &j in fold {
                assert_eq!(l1.row(j)[0], mean);
            }
        }
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.2, 0.3, 0.5]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(project_to_simplex(&[5.0, -1.0]), vec![1.0, 0.0]);
        let q = project_to_simplex(&[1.0, 1.0]);
        assert_eq!(q, vec![0.5, 0.5]);
    }

    #[test]
    fn weights_single_and_exact_column() {
        let one = LabeledTable::from_rows(vec![vec![1.0], vec![2.0]], vec![1.5, 1.5]).unwrap();
        assert_eq!(solve_stacking_weights(&one).unwrap(), vec![1.0]);

        let y: Vec<f64> = (0..15).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let rows = y.iter().enumerate().map(|(i, v)| vec![v + 1.0, *v, (i % 4) as f64]).collect();
        let l1 = LabeledTable::from_rows(rows, y).unwrap();
        let w = solve_stacking_weights(&l1).unwrap();
        assert!((w[1] - 1.0).abs() < 1e-6, "{w:?}");
        assert!(stacking_objective(&l1, &w) < 1e-9);
    }

    #[test]
    fn duplicate_columns_match_single_objective() {
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let rows: Vec<Vec<f64>> = y.iter().map(|v| vec![v * 0.9 + 0.3, v * 0.9 + 0.3]).collect();
        let l1 = LabeledTable::from_rows(rows.clone(), y.clone()).unwrap();
        let w = solve_stacking_weights(&l1).unwrap();
        let single = LabeledTable::from_rows(rows.iter().map(|r| vec![r[0]]).collect(), y).unwrap();
        assert!((stacking_objective(&l1, &w) - stacking_objective(&single, &[1.0])).abs() < 1e-9);
    }

    #[test]
    fn stacked_prediction_properties() {
        let a = FittedModel::Constant { value: 2.0, n_features: 1 };
        let b = FittedModel::Constant { value: 5.0, n_features: 1 };
        let one_hot = StackedModel::new(vec![a.clone(), b.clone()], vec!["a".into(), "b".into()], vec![0.0, 1.0]).unwrap();
        assert_eq!(predict_stacked(&one_hot, &[0.0]).unwrap(), 5.0);
        let mixed = StackedModel::new(vec![a.clone(), b], vec!["a".into(), "b".into()], vec![0.25, 0.75]).unwrap();
        assert_eq!(mixed.predict(&[0.0]).unwrap(), 4.25);
        let same = StackedModel::new(vec![a.clone(), a], vec!["a".into(), "c".into()], vec![0.3, 0.7]).unwrap();
        assert_eq!(same.predict(&[9.0]).unwrap(), 2.0);
        assert!(mixed.predict(&[0.0, 1.0]).is_err());
    }
}
