//! CART classification trees with Gini impurity.
//!
//! Split search sorts each feature's values at a node and sweeps the
//! midpoints between consecutive distinct values. Candidate splits are
//! compared exactly in integer arithmetic, so ties are decided by the fixed
//! order (lowest feature, then lowest threshold) rather than by rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fastfood::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 10, min_samples_leaf: 1, min_impurity_decrease: 0.0 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::Parameter("max_depth and min_samples_leaf must be at least 1".into()));
        }
        if !(self.min_impurity_decrease.is_finite() && self.min_impurity_decrease >= 0.0) {
            return Err(Error::Parameter("min_impurity_decrease must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go to `left`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { class_counts: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr")]
pub struct DecisionTree {
    n_classes: usize,
    n_features: usize,
    nodes: Vec<Node>,
}

#[derive(Deserialize)]
struct TreeRepr {
    n_classes: usize,
    n_features: usize,
    nodes: Vec<Node>,
}

impl TryFrom<TreeRepr> for DecisionTree {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        DecisionTree::from_nodes(r.nodes, r.n_classes, r.n_features)
    }
}

/// Gini impurity `1 − Σ p_k²` of a class histogram.
pub fn gini(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Exact split score `Σ_left c²/n_l + Σ_right c²/n_r` kept as a fraction.
/// Larger is better; it orders splits exactly as the Gini decrease does.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn new(left_sq: u64, n_left: u64, right_sq: u64, n_right: u64) -> Self {
        let num = u128::from(left_sq) * u128::from(n_right) + u128::from(right_sq) * u128::from(n_left);
        Score { num, den: u128::from(n_left) * u128::from(n_right) }
    }

    fn beats(&self, other: &Score) -> bool {
        self.num * other.den > other.num * self.den
    }

    fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: Score,
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = 0.5 * lo + 0.5 * hi;
    if t >= lo && t < hi {
        t
    } else {
        lo
    }
}

struct Builder<'a> {
    x: &'a DenseMatrix,
    y: &'a [u32],
    n_classes: usize,
    params: TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_classes];
        for &r in rows {
            counts[self.y[r] as usize] += 1;
        }
        counts
    }

    fn best_split(&self, rows: &[usize], counts: &[u64]) -> Option<Candidate> {
        let n = rows.len();
        let min_leaf = self.params.min_samples_leaf;
        let total_sq: u64 = counts.iter().map(|c| c * c).sum();
        let mut best: Option<Candidate> = None;
        let mut sorted: Vec<(f64, u32)> = Vec::with_capacity(n);
        let mut left = vec![0u64; self.n_classes];

        for feature in 0..self.x.cols() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.x.get(r, feature), self.y[r])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if sorted[0].0 == sorted[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|c| *c = 0);
            let mut left_sq = 0u64;
            let mut right_sq = total_sq;
            for i in 0..n - 1 {
                let k = sorted[i].1 as usize;
                left_sq += 2 * left[k] + 1;
                right_sq -= 2 * (counts[k] - left[k]) - 1;
                left[k] += 1;
                let n_left = i + 1;
                if n_left < min_leaf || n - n_left < min_leaf || sorted[i].0 == sorted[i + 1].0 {
                    continue;
                }
                let score = Score::new(left_sq, n_left as u64, right_sq, (n - n_left) as u64);
                if best.as_ref().is_none_or(|b| score.beats(&b.score)) {
                    best = Some(Candidate { feature, threshold: midpoint(sorted[i].0, sorted[i + 1].0), score });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class_counts: counts.clone() });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.params.max_depth || pure || rows.len() < 2 * self.params.min_samples_leaf {
            return id;
        }
        let Some(split) = self.best_split(&rows, &counts) else {
            return id;
        };
        if self.params.min_impurity_decrease > 0.0 {
            let n = rows.len() as f64;
            let parent_sq: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
            let decrease = split.score.value() / n - parent_sq / (n * n);
            if decrease < self.params.min_impurity_decrease {
                return id;
            }
        }
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.x.get(r, split.feature) <= split.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

/// Grow a tree on `x` (`n × D`) with class indices `y` in `0..n_classes`.
pub fn fit_tree(x: &DenseMatrix, y: &[u32], n_classes: usize, params: &TreeParams) -> Result<DecisionTree> {
    params.validate()?;
    if x.rows() == 0 {
        return Err(Error::Input("cannot fit a tree on empty data".into()));
    }
    if y.len() != x.rows() {
        return Err(Error::Dimension(format!("{} labels for {} rows", y.len(), x.rows())));
    }
    if n_classes == 0 || y.iter().any(|&l| l as usize >= n_classes) {
        return Err(Error::Input(format!("labels must lie in 0..{n_classes}")));
    }
    if let Some(i) = x.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite feature value at flat index {i}")));
    }
    let mut builder = Builder { x, y, n_classes, params: *params, nodes: Vec::new() };
    builder.grow((0..x.rows()).collect(), 0);
    Ok(DecisionTree { n_classes, n_features: x.cols(), nodes: builder.nodes })
}

impl DecisionTree {
    /// Assemble a tree from a node array rooted at index 0. Children must
    /// come after their parent and every node must be reachable once.
    pub fn from_nodes(nodes: Vec<Node>, n_classes: usize, n_features: usize) -> Result<Self> {
        if nodes.is_empty() || n_classes == 0 {
            return Err(Error::Input("a tree needs at least one node and one class".into()));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return Err(Error::Input(format!("node {i} has an invalid split")));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= nodes.len() {
                            return Err(Error::Input(format!("node {i} has child {c} out of order")));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf { class_counts } => {
                    if class_counts.len() != n_classes || class_counts.iter().sum::<u64>() == 0 {
                        return Err(Error::Input(format!("leaf {i} has an invalid class histogram")));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::Input("node array is not a tree".into()));
        }
        Ok(DecisionTree { n_classes, n_features, nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf `x` routes to.
    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::Dimension(format!("expected {} features, got {}", self.n_features, x.len())));
        }
        let mut i = 0;
        while let Node::Split { feature, threshold, left, right } = &self.nodes[i] {
            i = if x[*feature] <= *threshold { *left } else { *right };
        }
        Ok(i)
    }

    /// Class frequencies of the leaf `x` reaches.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let Node::Leaf { class_counts } = &self.nodes[self.leaf_index(x)?] else {
            unreachable!("leaf_index always stops at a leaf")
        };
        let total = class_counts.iter().sum::<u64>() as f64;
        Ok(class_counts.iter().map(|&c| c as f64 / total).collect())
    }
}

/// Free-function form of [`DecisionTree::predict_proba`].
pub fn tree_predict_proba(tree: &DecisionTree, x: &[f64]) -> Result<Vec<f64>> {
    tree.predict_proba(x)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}
