//! Stratified train/test splitting.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Splits indices so the train side holds `train_ratio` of the data within
/// one sample overall and per class. Per-class train counts are apportioned
/// by largest remainder against the global target.
pub fn stratified_split(
    labels: &[usize],
    train_ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::input("empty dataset"));
    }
    if !(0.0 < train_ratio && train_ratio < 1.0) {
        return Err(Error::config(format!("train ratio {train_ratio} outside (0, 1)")));
    }
    let n = labels.len();
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let target_total = (train_ratio * n as f64).round() as usize;
    let mut base: Vec<usize> = Vec::with_capacity(n_classes);
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(n_classes);
    for (c, members) in by_class.iter().enumerate() {
        let exact = train_ratio * members.len() as f64;
        let b = exact.floor() as usize;
        base.push(b);
        remainders.push((c, exact - b as f64));
    }
    let mut extras = target_total.saturating_sub(base.iter().sum::<usize>());
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut take = base;
    for (c, _) in remainders {
        if extras == 0 {
            break;
        }
        if take[c] < by_class[c].len() {
            take[c] += 1;
            extras -= 1;
        }
    }
    let mut rng = rng_from_seed(derive_seed(seed, "train-test-split"));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..take[c]]);
        test.extend_from_slice(&members[take[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_samples_split_six_four() {
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let (train, test) = stratified_split(&labels, 0.6, 1).unwrap();
        assert_eq!(train.len(), 6);
        assert_eq!(test.len(), 4);
        assert_eq!(train.iter().filter(|&&i| labels[i] == 0).count(), 3);
        assert_eq!(train.iter().filter(|&&i| labels[i] == 1).count(), 3);
    }

    #[test]
    fn partition_is_exact() {
        let labels: Vec<usize> = (0..57).map(|i| i % 3).collect();
        let (train, test) = stratified_split(&labels, 0.6, 2).unwrap();
        let mut all = train.clone();
        all.extend_from_slice(&test);
        all.sort_unstable();
        let expect: Vec<usize> = (0..57).collect();
        assert_eq!(all, expect);
    }

    #[test]
    fn sizes_and_class_proportions_within_one() {
        let mut labels = vec![0; 13];
        labels.extend(vec![1; 29]);
        labels.extend(vec![2, 2, 2, 2, 2, 2, 2]);
        let n = labels.len();
        let (train, _test) = stratified_split(&labels, 0.6, 3).unwrap();
        assert!((train.len() as f64 - 0.6 * n as f64).abs() <= 1.0);
        for c in 0..3 {
            let n_c = labels.iter().filter(|&&l| l == c).count();
            let t_c = train.iter().filter(|&&i| labels[i] == c).count();
            assert!(
                (t_c as f64 - 0.6 * n_c as f64).abs() <= 1.0,
                "class {c}: {t_c} of {n_c}"
            );
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        assert_eq!(
            stratified_split(&labels, 0.6, 7).unwrap(),
            stratified_split(&labels, 0.6, 7).unwrap()
        );
        assert_ne!(
            stratified_split(&labels, 0.6, 7).unwrap(),
            stratified_split(&labels, 0.6, 8).unwrap()
        );
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(stratified_split(&[], 0.6, 1).is_err());
        assert!(stratified_split(&[0, 1], 0.0, 1).is_err());
        assert!(stratified_split(&[0, 1], 1.0, 1).is_err());
    }
}
