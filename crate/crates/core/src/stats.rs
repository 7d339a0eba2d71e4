//! Dictionary coverage statistics.
//!
//! Counts unique tokens absent from a reference wordlist, per class and
//! overall. Tokens come from the same normalization as training, but with
//! no stopword removal, so the numbers describe the corpus as classifiers
//! see it before any filtering.

use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::DatasetFile;
use crate::text::normalize_and_tokenize;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassOovStats {
    pub label: String,
    pub total_unique: usize,
    pub absent_unique: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OovStats {
    pub total_unique: usize,
    pub absent_unique: usize,
    /// Share of unique tokens missing from the wordlist.
    pub fraction: f64,
    /// One entry per dataset label, in first-seen order.
    pub per_class: Vec<ClassOovStats>,
}

fn fraction(absent: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        absent as f64 / total as f64
    }
}

pub fn dictionary_oov_stats(dataset: &DatasetFile, wordlist: &BTreeSet<String>) -> OovStats {
    let no_stopwords = BTreeSet::new();
    let mut all: BTreeSet<String> = BTreeSet::new();
    let mut by_class: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for record in &dataset.records {
        let text = normalize_and_tokenize(&record.text, &no_stopwords);
        let class = by_class.entry(record.label.as_str()).or_default();
        for token in text.tokens {
            class.insert(token.clone());
            all.insert(token);
        }
    }
    let absent = |tokens: &BTreeSet<String>| tokens.iter().filter(|t| !wordlist.contains(*t)).count();
    let per_class = dataset
        .labels
        .iter()
        .map(|label| {
            let tokens = by_class.get(label.as_str()).cloned().unwrap_or_default();
            let miss = absent(&tokens);
            ClassOovStats {
                label: label.clone(),
                total_unique: tokens.len(),
                absent_unique: miss,
                fraction: fraction(miss, tokens.len()),
            }
        })
        .collect();
    let miss = absent(&all);
    OovStats {
        total_unique: all.len(),
        absent_unique: miss,
        fraction: fraction(miss, all.len()),
        per_class,
    }
}
