use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::learning::{LearnError, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Features per split; `None` means `⌊√p⌋`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: None, max_features: None, bootstrap: true }
    }
}

/// Bagged CART ensemble; the score is the mean leaf probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and feature subsets from
    /// `derive_index(seed, t)`, so the result does not depend on how the
    /// trees are scheduled across threads.
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &ForestParams, seed: u64) -> Result<Self> {
        if params.n_trees == 0 {
            return Err(LearnError::InvalidParam("n_trees must be at least 1".into()));
        }
        let p = x[0].len();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: 2,
            max_features: Some(params.max_features.unwrap_or(((p as f64).sqrt() as usize).max(1))),
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let tree_seed = seed::derive_index(seed, t as u64);
                let mut rng = seed::rng(seed::derive(tree_seed, "bootstrap"));
                let mut idx: Vec<usize> = if params.bootstrap {
                    (0..x.len()).map(|_| rng.random_range(0..x.len())).collect()
                } else {
                    (0..x.len()).collect()
                };
                DecisionTree::fit_rows(x, y, &mut idx, &tree_params, seed::derive(tree_seed, "split"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RandomForest { trees })
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.probability(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}
