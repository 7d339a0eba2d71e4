//! Cross-validation fold plans.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Disjoint index sets covering the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub stratified: bool,
    pub seed: u64,
}

impl FoldPlan {
    /// Train indices = everything outside fold `i`, in ascending order.
    pub fn train_indices(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Shuffles each class separately and deals members round-robin, so per-class
/// fold counts differ by at most one. The dealing origin rotates with the
/// class index to avoid piling every class's remainder onto fold 0.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::config("fold count must be at least 2"));
    }
    if labels.is_empty() {
        return Err(Error::input("empty label list"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::Stratification(format!(
                "class {c} has {} members, fewer than {k} folds",
                members.len()
            )));
        }
    }
    let mut rng = rng_from_seed(derive_seed(seed, "stratified-kfold"));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        for (j, &idx) in members.iter().enumerate() {
            folds[(j + c) % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { folds, stratified: true, seed })
}

/// Plain unstratified dealing over a shuffled index list.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::config("fold count must be at least 2"));
    }
    if n < k {
        return Err(Error::input(format!("{n} samples cannot fill {k} folds")));
    }
    let mut rng = rng_from_seed(derive_seed(seed, "kfold"));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (j, idx) in order.into_iter().enumerate() {
        folds[j % k].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { folds, stratified: false, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels_30_70() -> Vec<usize> {
        let mut l = vec![0; 30];
        l.extend(vec![1; 70]);
        l
    }

    #[test]
    fn exact_proportions_when_divisible() {
        let labels = labels_30_70();
        let plan = stratified_kfold(&labels, 10, 1).unwrap();
        for fold in &plan.folds {
            let c0 = fold.iter().filter(|&&i| labels[i] == 0).count();
            let c1 = fold.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!((c0, c1), (3, 7));
        }
    }

    #[test]
    fn folds_partition_the_index_set() {
        let labels = labels_30_70();
        let plan = stratified_kfold(&labels, 7, 3).unwrap();
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        let expect: Vec<usize> = (0..100).collect();
        assert_eq!(all, expect);
    }

    #[test]
    fn per_class_counts_within_one() {
        let mut labels = vec![0; 23];
        labels.extend(vec![1; 31]);
        labels.extend(vec![2; 17]);
        let plan = stratified_kfold(&labels, 5, 9).unwrap();
        for c in 0..3 {
            let counts: Vec<usize> = plan
                .folds
                .iter()
                .map(|f| f.iter().filter(|&&i| labels[i] == c).count())
                .collect();
            let min = counts.iter().min().unwrap();
            let max = counts.iter().max().unwrap();
            assert!(max - min <= 1, "class {c}: {counts:?}");
        }
    }

    #[test]
    fn undersized_class_errors() {
        let mut labels = vec![0; 50];
        labels.extend(vec![1; 5]);
        let err = stratified_kfold(&labels, 10, 1).unwrap_err();
        assert!(matches!(err, Error::Stratification(_)));
    }

    #[test]
    fn deterministic_given_seed() {
        let labels = labels_30_70();
        assert_eq!(
            stratified_kfold(&labels, 10, 5).unwrap(),
            stratified_kfold(&labels, 10, 5).unwrap()
        );
        assert_ne!(
            stratified_kfold(&labels, 10, 5).unwrap().folds,
            stratified_kfold(&labels, 10, 6).unwrap().folds
        );
    }

    #[test]
    fn train_indices_complement_the_fold() {
        let labels = labels_30_70();
        let plan = stratified_kfold(&labels, 4, 2).unwrap();
        let train = plan.train_indices(0);
        assert_eq!(train.len() + plan.folds[0].len(), 100);
        for i in &plan.folds[0] {
            assert!(!train.contains(i));
        }
    }

    #[test]
    fn plain_kfold_partitions() {
        let plan = kfold(13, 4, 1).unwrap();
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 13);
        assert!(sizes.iter().all(|&s| s == 3 || s == 4));
        assert!(!plan.stratified);
    }
}
