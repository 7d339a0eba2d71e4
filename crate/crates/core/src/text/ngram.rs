//! Character n-gram featurization.
//!
//! By default n-grams slide over the whole normalized text, spaces included,
//! so boundary patterns around concatenations ("stupidbitch") get columns of
//! their own; per-token mode restricts extraction to within each token.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::nn::matrix::l2_normalize;
use crate::text::tokenize::NormalizedText;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgramScope {
    /// Slide over the normalized text including inter-token spaces.
    Text,
    /// Slide within each token separately.
    Token,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramVectorizer {
    pub n_min: usize,
    pub n_max: usize,
    pub scope: NgramScope,
    columns: BTreeMap<String, usize>,
    /// Column names in index order.
    names: Vec<String>,
}

impl NgramVectorizer {
    /// Learns the column set from training texts in first-seen order.
    /// `min_count` drops n-grams seen fewer times in total (default 1 keeps
    /// everything).
    pub fn fit(
        texts: &[NormalizedText],
        n_min: usize,
        n_max: usize,
        scope: NgramScope,
        min_count: u64,
    ) -> Result<NgramVectorizer> {
        if n_min < 1 || n_min > n_max {
            return Err(Error::config(format!("invalid n-gram range [{n_min}, {n_max}]")));
        }
        let mut first_seen: Vec<String> = Vec::new();
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for text in texts {
            for_each_ngram(text, n_min, n_max, scope, |gram| {
                match counts.get_mut(gram) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(gram.to_string(), 1);
                        first_seen.push(gram.to_string());
                    }
                }
            });
        }
        let mut columns = BTreeMap::new();
        let mut names = Vec::new();
        for gram in first_seen {
            if counts[&gram] >= min_count {
                columns.insert(gram.clone(), names.len());
                names.push(gram);
            }
        }
        Ok(NgramVectorizer { n_min, n_max, scope, columns, names })
    }

    pub fn from_parts(
        n_min: usize,
        n_max: usize,
        scope: NgramScope,
        names: Vec<String>,
    ) -> Result<NgramVectorizer> {
        if n_min < 1 || n_min > n_max {
            return Err(Error::Container(format!("invalid n-gram range [{n_min}, {n_max}]")));
        }
        let mut columns = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let len = name.chars().count();
            if len < n_min || len > n_max {
                return Err(Error::Container(format!("column {name:?} outside n-gram range")));
            }
            if columns.insert(name.clone(), i).is_some() {
                return Err(Error::Container(format!("duplicate n-gram column {name:?}")));
            }
        }
        Ok(NgramVectorizer { n_min, n_max, scope, columns, names })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    /// Raw occurrence counts per column; unseen n-grams are ignored.
    pub fn counts(&self, text: &NormalizedText) -> Vec<f64> {
        let mut out = vec![0.0; self.names.len()];
        for_each_ngram(text, self.n_min, self.n_max, self.scope, |gram| {
            if let Some(&col) = self.columns.get(gram) {
                out[col] += 1.0;
            }
        });
        out
    }

    /// L2-normalized counts; a text sharing no n-grams with training yields
    /// the zero vector.
    pub fn transform(&self, text: &NormalizedText) -> Vec<f64> {
        let mut v = self.counts(text);
        l2_normalize(&mut v);
        v
    }
}

fn for_each_ngram(
    text: &NormalizedText,
    n_min: usize,
    n_max: usize,
    scope: NgramScope,
    mut f: impl FnMut(&str),
) {
    let mut buf = String::new();
    let mut over = |chars: &[char]| {
        for n in n_min..=n_max {
            if chars.len() < n {
                break;
            }
            for window in chars.windows(n) {
                buf.clear();
                buf.extend(window.iter());
                f(&buf);
            }
        }
    };
    match scope {
        NgramScope::Text => {
            let chars: Vec<char> = text.normalized.chars().collect();
            over(&chars);
        }
        NgramScope::Token => {
            for tok in &text.tokens {
                let chars: Vec<char> = tok.chars().collect();
                over(&chars);
            }
        }
    }
}
