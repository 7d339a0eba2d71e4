//! Cross-validated hyperparameter grid search.

use super::{gbdt_train, GbdtConfig, GbdtEnsemble};
use crate::error::Result;
use crate::eval::{compute_metrics, stratified_kfold};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rounds: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub max_depth: Vec<usize>,
    pub min_leaf: Vec<usize>,
    pub lambda: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rounds: vec![50, 100, 200],
            learning_rate: vec![0.05, 0.1],
            max_depth: vec![4, 6],
            min_leaf: vec![10, 20],
            lambda: 1.0,
        }
    }
}

impl GridSpec {
    /// A single fixed configuration as a degenerate grid.
    pub fn single(config: GbdtConfig) -> GridSpec {
        GridSpec {
            rounds: vec![config.rounds],
            learning_rate: vec![config.learning_rate],
            max_depth: vec![config.max_depth],
            min_leaf: vec![config.min_leaf],
            lambda: config.lambda,
        }
    }

    pub fn points(&self) -> Vec<GbdtConfig> {
        let mut out = Vec::new();
        for &rounds in &self.rounds {
            for &learning_rate in &self.learning_rate {
                for &max_depth in &self.max_depth {
                    for &min_leaf in &self.min_leaf {
                        out.push(GbdtConfig {
                            rounds,
                            learning_rate,
                            max_depth,
                            min_leaf,
                            lambda: self.lambda,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub config: GbdtConfig,
    pub fold_scores: Vec<f64>,
    pub mean_macro_f1: f64,
}

/// Evaluates every grid point by stratified k-fold macro F1 on the same fold
/// plan and returns the winner plus the full table. Ties go to the smaller
/// model: fewer rounds, then shallower depth, then larger min-leaf, then
/// smaller learning rate.
pub fn grid_search(
    features: &[Vec<f64>],
    labels: &[usize],
    grid: &GridSpec,
    k: usize,
    seed: u64,
) -> Result<(GbdtConfig, Vec<GridPoint>)> {
    let plan = stratified_kfold(labels, k, seed)?;
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut table = Vec::new();
    for config in grid.points() {
        let mut fold_scores = Vec::with_capacity(k);
        for fi in 0..k {
            let train_idx = plan.train_indices(fi);
            let test_idx = &plan.folds[fi];
            let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| features[i].clone()).collect();
            let train_y: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
            let model = gbdt_train(&train_x, &train_y, &config)?;
            let gold: Vec<usize> = test_idx.iter().map(|&i| labels[i]).collect();
            let pred: Vec<usize> = test_idx
                .iter()
                .map(|&i| model.predict_class(&features[i]))
                .collect::<Result<_>>()?;
            let report = compute_metrics(&gold, &pred, n_classes)?;
            fold_scores.push(report.macro_f1);
        }
        let mean_macro_f1 = fold_scores.iter().sum::<f64>() / k as f64;
        table.push(GridPoint { config, fold_scores, mean_macro_f1 });
    }
    let best = table
        .iter()
        .max_by(|a, b| {
            a.mean_macro_f1
                .partial_cmp(&b.mean_macro_f1)
                .unwrap()
                .then(b.config.rounds.cmp(&a.config.rounds))
                .then(b.config.max_depth.cmp(&a.config.max_depth))
                .then(a.config.min_leaf.cmp(&b.config.min_leaf))
                .then(b.config.learning_rate.partial_cmp(&a.config.learning_rate).unwrap())
        })
        .expect("grid is nonempty")
        .config;
    Ok((best, table))
}

/// Grid search followed by a final fit of the winning config on all data.
pub fn grid_search_train(
    features: &[Vec<f64>],
    labels: &[usize],
    grid: &GridSpec,
    k: usize,
    seed: u64,
) -> Result<(GbdtEnsemble, Vec<GridPoint>)> {
    let (best, table) = grid_search(features, labels, grid, k, seed)?;
    Ok((gbdt_train(features, labels, &best)?, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn blob_data() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let jitter = (i % 5) as f64 * 0.01;
            if i % 2 == 0 {
                features.push(vec![0.0 + jitter, 1.0 - jitter]);
                labels.push(0);
            } else {
                features.push(vec![5.0 + jitter, -3.0 + jitter]);
                labels.push(1);
            }
        }
        (features, labels)
    }

    #[test]
    fn single_point_grid_returns_it() {
        let (x, y) = blob_data();
        let cfg = GbdtConfig { rounds: 5, learning_rate: 0.3, max_depth: 2, min_leaf: 1, lambda: 1.0 };
        let (best, table) = grid_search(&x, &y, &GridSpec::single(cfg), 5, 1).unwrap();
        assert_eq!(best, cfg);
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].fold_scores.len(), 5);
    }

    #[test]
    fn table_covers_the_whole_grid() {
        let (x, y) = blob_data();
        let grid = GridSpec {
            rounds: vec![2, 4],
            learning_rate: vec![0.3],
            max_depth: vec![2, 3],
            min_leaf: vec![1],
            lambda: 1.0,
        };
        let (best, table) = grid_search(&x, &y, &grid, 3, 2).unwrap();
        assert_eq!(table.len(), 4);
        assert!(table.iter().all(|p| p.fold_scores.len() == 3));
        let best_mean = table
            .iter()
            .find(|p| p.config == best)
            .unwrap()
            .mean_macro_f1;
        assert!(table.iter().all(|p| p.mean_macro_f1 <= best_mean));
    }

    #[test]
    fn ties_prefer_smaller_models() {
        let (x, y) = blob_data();
        let grid = GridSpec {
            rounds: vec![8, 2],
            learning_rate: vec![0.3],
            max_depth: vec![3, 2],
            min_leaf: vec![1],
            lambda: 1.0,
        };
        let (best, table) = grid_search(&x, &y, &grid, 3, 2).unwrap();
        let top = table
            .iter()
            .map(|p| p.mean_macro_f1)
            .fold(f64::NEG_INFINITY, f64::max);
        let smallest_top = table
            .iter()
            .filter(|p| p.mean_macro_f1 == top)
            .min_by_key(|p| (p.config.rounds, p.config.max_depth))
            .unwrap();
        assert_eq!(best, smallest_top.config);
    }

    #[test]
    fn undersized_class_errors() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![0, 0, 0, 1];
        let err = grid_search(&x, &y, &GridSpec::single(GbdtConfig::default()), 3, 1).unwrap_err();
        assert!(matches!(err, Error::Stratification(_)));
    }
}
