//! CART regression trees.
//!
//! Splits are chosen greedily to minimise the (optionally weighted) sum of
//! squared errors of the two children. Candidate thresholds are midpoints
//! between consecutive distinct feature values. A candidate replaces the
//! incumbent only if it lowers the children's SSE by more than
//! `SPLIT_TIE_TOLERANCE` times the node SSE, so near-ties go to the lowest
//! feature index and then the lowest threshold.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::table::LabeledTable;

/// Relative SSE improvement a later split candidate must exceed to win.
pub const SPLIT_TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// Growth limits for a single tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf_size: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { min_leaf_size: 1, max_depth: None }
    }
}

impl TreeParams {
    pub fn new(min_leaf_size: usize) -> Self {
        Self { min_leaf_size, max_depth: None }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.min_leaf_size == 0 {
            return domain("min_leaf_size must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    root: Node,
    n_features: usize,
    params: TreeParams,
}

impl RegressionTree {
    /// Single-leaf tree.
    pub fn constant(value: f64, n_features: usize) -> Self {
        Self { root: Node::Leaf { value }, n_features, params: TreeParams::default() }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn n_leaves(&self) -> usize {
        self.root.leaves()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_features, x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

/// Fits a tree on every row of `data`, optionally restricted to a fixed
/// subset of feature columns.
pub fn fit_regression_tree(
    data: &LabeledTable,
    min_leaf_size: usize,
    feature_subset: Option<&[usize]>,
) -> Result<RegressionTree> {
    let params = TreeParams::new(min_leaf_size);
    let features = match feature_subset {
        Some(s) => FeatureChoice::Fixed(s.to_vec()),
        None => FeatureChoice::All,
    };
    let samples: Vec<usize> = (0..data.n_rows()).collect();
    grow(data, &samples, None, params, features)
}

/// Fits a tree with explicit growth limits.
pub fn fit_tree_with(data: &LabeledTable, params: TreeParams) -> Result<RegressionTree> {
    let samples: Vec<usize> = (0..data.n_rows()).collect();
    grow(data, &samples, None, params, FeatureChoice::All)
}

/// How candidate features are chosen at each node.
pub(crate) enum FeatureChoice {
    All,
    Fixed(Vec<usize>),
    /// Fresh random subset of `mtry` features at every split.
    PerSplit { mtry: usize, rng: ChaCha8Rng },
}

/// Grows a tree over `samples` (row indices, repeats allowed) with optional
/// per-row weights.
pub(crate) fn grow(
    data: &LabeledTable,
    samples: &[usize],
    weights: Option<&[f64]>,
    params: TreeParams,
    features: FeatureChoice,
) -> Result<RegressionTree> {
    params.validate()?;
    if samples.is_empty() {
        return domain("cannot fit a tree on an empty table");
    }
    let k = data.n_features();
    match &features {
        FeatureChoice::Fixed(s) => {
            if s.is_empty() || s.iter().any(|&f| f >= k) {
                return domain(format!("feature subset {s:?} is invalid for {k} features"));
            }
        }
        FeatureChoice::PerSplit { mtry, .. } => {
            if *mtry == 0 || *mtry > k {
                return domain(format!("mtry = {mtry} must lie in 1..={k}"));
            }
        }
        FeatureChoice::All => {}
    }
    if let Some(w) = weights {
        if w.len() != data.n_rows() || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("sample weights must be nonnegative and one per row");
        }
    }
    let mut builder = Builder { data, weights, params, features };
    let mut idx = samples.to_vec();
    let root = builder.node(&mut idx, 0);
    Ok(RegressionTree { root, n_features: k, params })
}

struct Builder<'a> {
    data: &'a LabeledTable,
    weights: Option<&'a [f64]>,
    params: TreeParams,
    features: FeatureChoice,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    children_sse: f64,
}

impl Builder<'_> {
    fn w(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }

    fn node(&mut self, idx: &mut [usize], depth: usize) -> Node {
        let y = self.data.targets();
        let (mut sw, mut swy) = (0.0, 0.0);
        for &i in idx.iter() {
            sw += self.w(i);
            swy += self.w(i) * y[i];
        }
        let mean = if sw > 0.0 {
            swy / sw
        } else {
            idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
        };
        let leaf = Node::Leaf { value: mean };

        let first = y[idx[0]];
        if idx.iter().all(|&i| y[i] == first) {
            return Node::Leaf { value: first };
        }
        if idx.len() <= self.params.min_leaf_size || self.params.max_depth.is_some_and(|d| depth >= d) {
            return leaf;
        }
        let node_sse: f64 = idx.iter().map(|&i| self.w(i) * (y[i] - mean).powi(2)).sum();

        let candidates = self.candidate_features();
        let Some(best) = self.best_split(idx, mean, node_sse, &candidates) else {
            return leaf;
        };

        let x = self.data.rows();
        // stable partition keeps sample order inside the children
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| x[i][best.feature] <= best.threshold);
        let n_left = left.len();
        for (slot, i) in idx.iter_mut().zip(left.into_iter().chain(right)) {
            *slot = i;
        }
        let (l, r) = idx.split_at_mut(n_left);
        let left = self.node(l, depth + 1);
        let right = self.node(r, depth + 1);
        Node::Split { feature: best.feature, threshold: best.threshold, left: Box::new(left), right: Box::new(right) }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let k = self.data.n_features();
        match &mut self.features {
            FeatureChoice::All => (0..k).collect(),
            FeatureChoice::Fixed(s) => {
                let mut s = s.clone();
                s.sort_unstable();
                s.dedup();
                s
            }
            FeatureChoice::PerSplit { mtry, rng } => {
                let mut pool: Vec<usize> = (0..k).collect();
                for i in 0..*mtry {
                    let j = rng.random_range(i..k);
                    pool.swap(i, j);
                }
                let mut s = pool[..*mtry].to_vec();
                s.sort_unstable();
                s
            }
        }
    }

    fn best_split(&self, idx: &[usize], mean: f64, node_sse: f64, features: &[usize]) -> Option<Candidate> {
        let x = self.data.rows();
        let y = self.data.targets();
        let n = idx.len();
        let min_leaf = self.params.min_leaf_size;
        let tol = SPLIT_TIE_TOLERANCE * node_sse;
        let mut best: Option<Candidate> = None;
        let mut order: Vec<usize> = idx.to_vec();

        for &f in features {
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
            // centred sums keep the gain arithmetic well conditioned
            let (mut tw, mut twy) = (0.0, 0.0);
            for &i in &order {
                tw += self.w(i);
                twy += self.w(i) * (y[i] - mean);
            }
            let (mut lw, mut lwy) = (0.0, 0.0);
            for pos in 0..n - 1 {
                let i = order[pos];
                lw += self.w(i);
                lwy += self.w(i) * (y[i] - mean);
                let (a, b) = (x[i][f], x[order[pos + 1]][f]);
                if a == b {
                    continue;
                }
                let n_left = pos + 1;
                if n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let rw = tw - lw;
                let rwy = twy - lwy;
                let gain = sq_over(lwy, lw) + sq_over(rwy, rw) - sq_over(twy, tw);
                let children_sse = node_sse - gain;
                let better = match &best {
                    None => true,
                    Some(c) => children_sse < c.children_sse - tol,
                };
                if better {
                    let mut threshold = 0.5 * (a + b);
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(Candidate { feature: f, threshold, children_sse });
                }
            }
        }
        best
    }
}

fn sq_over(s: f64, w: f64) -> f64 {
    if w > 0.0 {
        s * s / w
    } else {
        0.0
    }
}
