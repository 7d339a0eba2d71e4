//! Metrics, data splitting, and significance testing.

pub mod folds;
pub mod metrics;
pub mod split;
pub mod ttest;

pub use folds::{kfold, stratified_kfold, FoldPlan};
pub use metrics::{compute_metrics, metrics_tsv, ClassMetrics, ConfusionMatrix, MetricsReport};
pub use split::stratified_split;
pub use ttest::{paired_t_test, t_cdf, t_two_sided_p};
