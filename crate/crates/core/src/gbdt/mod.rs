//! Multiclass gradient-boosted decision trees with softmax coupling.
//!
//! Each boosting round fits one regression tree per class to that class's
//! softmax gradient and hessian, computed from the scores standing at the
//! start of the round. Scores start at the empirical log-priors.

pub mod grid;
pub mod tree;

pub use grid::{grid_search, grid_search_train, GridPoint, GridSpec};
pub use tree::{DecisionTree, Node};

use crate::error::{Error, Result};
use crate::nn::loss::softmax;
use tree::{fit_tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: f64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            rounds: 100,
            learning_rate: 0.1,
            max_depth: 6,
            min_leaf: 10,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtEnsemble {
    pub n_classes: usize,
    pub n_features: usize,
    pub config: GbdtConfig,
    /// Initial per-class scores: empirical log-priors.
    pub priors: Vec<f64>,
    /// `trees[round][class]`; leaf values carry the learning rate already.
    pub trees: Vec<Vec<DecisionTree>>,
}

impl GbdtEnsemble {
    /// Summed per-class scores (priors plus the first `rounds` rounds).
    pub fn decision_scores_at(&self, features: &[f64], rounds: usize) -> Result<Vec<f64>> {
        if features.len() != self.n_features {
            return Err(Error::input(format!(
                "feature length {} does not match training length {}",
                features.len(),
                self.n_features
            )));
        }
        let mut scores = self.priors.clone();
        for round in self.trees.iter().take(rounds) {
            for (c, tree) in round.iter().enumerate() {
                scores[c] += tree.predict(features);
            }
        }
        Ok(scores)
    }

    pub fn decision_scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.decision_scores_at(features, self.trees.len())
    }

    /// Class distribution: softmax of the summed scores.
    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.decision_scores(features)?))
    }

    pub fn predict_class(&self, features: &[f64]) -> Result<usize> {
        let p = self.predict(features)?;
        Ok(argmax(&p))
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Mean softmax log-loss of `ensemble` truncated to `rounds` rounds.
pub fn log_loss_at(
    ensemble: &GbdtEnsemble,
    features: &[Vec<f64>],
    labels: &[usize],
    rounds: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for (x, &y) in features.iter().zip(labels.iter()) {
        let p = softmax(&ensemble.decision_scores_at(x, rounds)?);
        total += -p[y].max(1e-300).ln();
    }
    Ok(total / labels.len() as f64)
}

pub fn gbdt_train(
    features: &[Vec<f64>],
    labels: &[usize],
    config: &GbdtConfig,
) -> Result<GbdtEnsemble> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::input("features/labels must be nonempty and equal length"));
    }
    let n = features.len();
    let n_features = features[0].len();
    if features.iter().any(|f| f.len() != n_features) {
        return Err(Error::input("ragged feature rows"));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite feature value"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut class_counts = vec![0usize; n_classes];
    for &y in labels {
        class_counts[y] += 1;
    }
    if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::input("all labels identical"));
    }
    if config.rounds == 0 || config.learning_rate <= 0.0 || config.max_depth == 0 {
        return Err(Error::config("rounds, learning rate, and depth must be positive"));
    }
    let priors: Vec<f64> = class_counts
        .iter()
        .map(|&c| (c as f64 / n as f64).ln())
        .collect();
    let tree_params = TreeParams {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf.max(1),
        lambda: config.lambda,
        shrinkage: config.learning_rate,
    };
    let all_indices: Vec<usize> = (0..n).collect();
    let mut scores: Vec<Vec<f64>> = vec![priors.clone(); n];
    let mut rounds = Vec::with_capacity(config.rounds);
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    for _ in 0..config.rounds {
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();
        let mut round_trees = Vec::with_capacity(n_classes);
        for c in 0..n_classes {
            for i in 0..n {
                let p = probs[i][c];
                g[i] = p - if labels[i] == c { 1.0 } else { 0.0 };
                h[i] = (p * (1.0 - p)).max(1e-16);
            }
            let tree = fit_tree(features, &g, &h, &all_indices, &tree_params);
            for i in 0..n {
                scores[i][c] += tree.predict(&features[i]);
            }
            round_trees.push(tree);
        }
        rounds.push(round_trees);
    }
    Ok(GbdtEnsemble {
        n_classes,
        n_features,
        config: *config,
        priors,
        trees: rounds,
    })
}
