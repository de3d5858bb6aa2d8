//! Independent reference implementations used as test oracles. They favour
//! directness over speed: every candidate split is scored by recomputing
//! both children's sums of squares from scratch.

#![allow(dead_code)]

use fso_qos::learners::{Node, RegressionTree, SPLIT_TIE_TOLERANCE};
use fso_qos::stacking::stacking_objective;
use fso_qos::LabeledTable;

#[derive(Debug, Clone, PartialEq)]
pub enum RefNode {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: Box<RefNode>, right: Box<RefNode> },
}

impl RefNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            RefNode::Leaf(v) => *v,
            RefNode::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sse(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|y| (y - m) * (y - m)).sum()
}

/// Exhaustive CART: every feature in ascending order, every midpoint between
/// consecutive distinct values in ascending order, first best wins unless a
/// later one is lower by more than the tie tolerance.
pub fn brute_force_tree(x: &[Vec<f64>], y: &[f64], min_leaf: usize) -> RefNode {
    let idx: Vec<usize> = (0..y.len()).collect();
    build(x, y, &idx, min_leaf)
}

fn build(x: &[Vec<f64>], y: &[f64], idx: &[usize], min_leaf: usize) -> RefNode {
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    if ys.iter().all(|v| *v == ys[0]) {
        return RefNode::Leaf(ys[0]);
    }
    if idx.len() <= min_leaf {
        return RefNode::Leaf(mean(&ys));
    }
    let tol = SPLIT_TIE_TOLERANCE * sse(&ys);
    let k = x[0].len();
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..k {
        let mut values: Vec<f64> = idx.iter().map(|&i| x[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let left: Vec<f64> = idx.iter().filter(|&&i| x[i][f] <= t).map(|&i| y[i]).collect();
            let right: Vec<f64> = idx.iter().filter(|&&i| x[i][f] > t).map(|&i| y[i]).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let score = sse(&left) + sse(&right);
            if best.is_none_or(|(_, _, s)| score < s - tol) {
                best = Some((f, t, score));
            }
        }
    }
    let Some((feature, threshold, _)) = best else {
        return RefNode::Leaf(mean(&ys));
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
    RefNode::Split {
        feature,
        threshold,
        left: Box::new(build(x, y, &l, min_leaf)),
        right: Box::new(build(x, y, &r, min_leaf)),
    }
}

/// Structural comparison; leaf values may differ by `tol` absolute.
pub fn same_structure(a: &Node, b: &RefNode, tol: f64) -> bool {
    match (a, b) {
        (Node::Leaf { value }, RefNode::Leaf(v)) => (value - v).abs() <= tol,
        (
            Node::Split { feature, threshold, left, right },
            RefNode::Split { feature: f, threshold: t, left: l, right: r },
        ) => feature == f && threshold == t && same_structure(left, l, tol) && same_structure(right, r, tol),
        _ => false,
    }
}

pub fn tree_matches(tree: &RegressionTree, oracle: &RefNode) -> bool {
    same_structure(tree.root(), oracle, 1e-9)
}

/// Gradient boosting written out longhand: mean start, residual trees from
/// the brute-force builder, shrunk updates. Returns the staged predictions
/// at each row of `x`, entry `n` after `n` stages.
pub fn reference_boosting(x: &[Vec<f64>], y: &[f64], n_stages: usize, rate: f64, min_leaf: usize) -> Vec<Vec<f64>> {
    let f0 = mean(y);
    let mut current = vec![f0; y.len()];
    let mut stages = vec![current.clone()];
    for _ in 0..n_stages {
        let residuals: Vec<f64> = y.iter().zip(&current).map(|(a, b)| a - b).collect();
        let tree = brute_force_tree(x, &residuals, min_leaf);
        for (c, row) in current.iter_mut().zip(x) {
            *c += rate * tree.predict(row);
        }
        stages.push(current.clone());
    }
    stages
}

/// Tiny deterministic generator so oracle instances do not depend on the
/// library's own RNG plumbing.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 42) as f64
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Random tree instance: `m ≤ 12` rows, `k ≤ 2` features, values drawn from
/// a coarse grid half the time so ties and repeated values are common.
pub fn random_instance(rng: &mut Lcg) -> (Vec<Vec<f64>>, Vec<f64>, usize) {
    let m = 2 + rng.below(11) as usize;
    let k = 1 + rng.below(2) as usize;
    let coarse = rng.below(2) == 0;
    let draw = |rng: &mut Lcg| if coarse { rng.below(4) as f64 } else { (rng.uniform() * 20.0 - 10.0).round() / 4.0 };
    let x: Vec<Vec<f64>> = (0..m).map(|_| (0..k).map(|_| draw(rng)).collect()).collect();
    let y: Vec<f64> = (0..m).map(|_| draw(rng)).collect();
    let min_leaf = 1 + rng.below(3) as usize;
    (x, y, min_leaf)
}

/// Solves the normal equations for `[1, x]` by Gaussian elimination.
pub fn least_squares(data: &LabeledTable) -> Vec<f64> {
    let k = data.n_features() + 1;
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, y) in data.rows().iter().zip(data.targets()) {
        let z: Vec<f64> = std::iter::once(1.0).chain(row.iter().copied()).collect();
        for i in 0..k {
            for j in 0..k {
                a[i][j] += z[i] * z[j];
            }
            a[i][k] += z[i] * y;
        }
    }
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    (0..k).map(|i| a[i][k] / a[i][i]).collect()
}

/// Best objective over the step-0.01 grid on the 3-simplex.
pub fn grid_minimum(level1: &LabeledTable) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=100 {
        for b in 0..=(100 - a) {
            let w = [a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0];
            best = best.min(stacking_objective(level1, &w));
        }
    }
    best
}

/// Three noisy, differently biased predictors of a uniform target.
pub fn random_level1(rng: &mut Lcg, m: usize) -> LabeledTable {
    let y: Vec<f64> = (0..m).map(|_| rng.uniform() * 10.0).collect();
    let rows = y
        .iter()
        .map(|t| {
            vec![t + rng.uniform() * 4.0 - 2.0, t * (0.5 + rng.uniform()), rng.uniform() * 10.0]
        })
        .collect();
    LabeledTable::from_rows(rows, y).unwrap()
}
