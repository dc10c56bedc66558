use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::learning::{LearnError, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features considered per split; `None` means all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: Some(10), min_samples_split: 2, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { probability: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree with Gini impurity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    params: &'a TreeParams,
    rng: R,
    features: Vec<usize>,
    nodes: Vec<Node>,
}

fn gini(pos: usize, n: usize) -> f64 {
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl<R: Rng> Builder<'_, R> {
    /// Best `(weighted impurity, feature, threshold)` over the candidate
    /// features. A split is taken even without impurity decrease (XOR needs
    /// that at the root); features are tried in a shuffled order when
    /// subsampling and further features are drawn if none of the first
    /// `max_features` can split the node.
    fn best_split(&mut self, idx: &mut [usize]) -> Option<(usize, f64)> {
        let p = self.features.len();
        let k = self.params.max_features.unwrap_or(p).clamp(1, p);
        if k < p {
            self.features.shuffle(&mut self.rng);
        }
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let mut best: Option<(f64, usize, f64)> = None;
        for (tried, &f) in self.features.iter().enumerate() {
            if tried >= k && best.is_some() {
                break;
            }
            let x = self.x;
            idx.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            let mut left_pos = 0;
            for cut in 1..n {
                left_pos += usize::from(self.y[idx[cut - 1]]);
                let (lo, hi) = (x[idx[cut - 1]][f], x[idx[cut]][f]);
                if lo == hi {
                    continue;
                }
                let right_pos = total_pos - left_pos;
                let score = (cut as f64 * gini(left_pos, cut) + (n - cut) as f64 * gini(right_pos, n - cut)) / n as f64;
                if best.is_none_or(|(b, _, _)| score < b) {
                    let mid = 0.5 * (lo + hi);
                    // Guard against the midpoint rounding onto `hi`.
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { probability: pos as f64 / n as f64 });
        let pure = pos == 0 || pos == n;
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || n < self.params.min_samples_split.max(2) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return id;
        };
        let x = self.x;
        let mut left: Vec<usize> = idx.iter().copied().filter(|&i| x[i][feature] <= threshold).collect();
        let mut right: Vec<usize> = idx.iter().copied().filter(|&i| x[i][feature] > threshold).collect();
        let l = self.grow(&mut left, depth + 1);
        let r = self.grow(&mut right, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left: l, right: r };
        id
    }
}

impl DecisionTree {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &TreeParams, seed: u64) -> Result<Self> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        Self::fit_rows(x, y, &mut idx, params, seed)
    }

    /// Fits on the multiset of rows `idx` (bootstrap samples repeat rows).
    pub fn fit_rows(x: &[Vec<f64>], y: &[bool], idx: &mut [usize], params: &TreeParams, seed: u64) -> Result<Self> {
        if idx.is_empty() {
            return Err(LearnError::Empty);
        }
        if params.max_features == Some(0) {
            return Err(LearnError::InvalidParam("max_features must be at least 1".into()));
        }
        let mut b =
            Builder { x, y, params, rng: seed::rng(seed), features: (0..x[0].len()).collect(), nodes: Vec::new() };
        b.grow(idx, 0);
        Ok(DecisionTree { nodes: b.nodes })
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { probability } => return probability,
                Node::Split { feature, threshold, left, right } => {
                    id = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
