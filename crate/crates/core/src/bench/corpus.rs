//! Synthetic labeled corpora with planted, obfuscated class markers.
//!
//! Each document is filler words plus at least one marker word of its class.
//! Markers in the test split are disguised at a configurable rate, so the
//! rate dials how much of the class signal hides behind vocabulary the
//! training split never saw: rate 0 leaves every marker intact, rate 1
//! guarantees every test marker token is absent from the training
//! vocabulary.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bench::ops::{obfuscate_with, standard_ops};
use crate::dataset::Record;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::text::{default_stopwords, normalize_and_tokenize};

/// Chance that a slot beyond the guaranteed one also holds a marker.
const EXTRA_MARKER_RATE: f64 = 0.15;
/// Redraw budget when an obfuscated form collides with a training token.
const COLLISION_RETRIES: usize = 32;

#[derive(Debug, Clone)]
pub struct SyntheticCorpusSpec {
    /// One lexicon per class; pairwise disjoint.
    pub marker_lexicons: Vec<Vec<String>>,
    pub fillers: Vec<String>,
    /// Document length bounds, drawn uniformly inclusive.
    pub doc_len_min: usize,
    pub doc_len_max: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Share of test-split marker tokens to disguise; the train split is
    /// never touched.
    pub obfuscation_rate: f64,
    pub seed: u64,
}

impl SyntheticCorpusSpec {
    pub fn n_classes(&self) -> usize {
        self.marker_lexicons.len()
    }

    /// Class label strings in class-index order.
    pub fn class_names(&self) -> Vec<String> {
        (0..self.n_classes()).map(|c| format!("class{c}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.marker_lexicons.len() < 2 {
            return Err(Error::config("need at least two marker lexicons"));
        }
        let stop = default_stopwords();
        let empty = BTreeSet::new();
        let check_word = |word: &str, role: &str| -> Result<()> {
            if word.is_empty() {
                return Err(Error::config(format!("empty {role} word")));
            }
            let toks = normalize_and_tokenize(word, &empty).tokens;
            if toks.len() != 1 || toks[0] != word {
                return Err(Error::config(format!(
                    "{role} '{word}' does not survive tokenization unchanged"
                )));
            }
            if stop.contains(word) {
                return Err(Error::config(format!(
                    "{role} '{word}' is a stopword and would be dropped"
                )));
            }
            Ok(())
        };
        let mut seen_markers: BTreeSet<&str> = BTreeSet::new();
        for (c, lexicon) in self.marker_lexicons.iter().enumerate() {
            if lexicon.is_empty() {
                return Err(Error::config(format!("class {c} marker lexicon is empty")));
            }
            let mut within: BTreeSet<&str> = BTreeSet::new();
            for word in lexicon {
                check_word(word, "marker")?;
                if !within.insert(word) {
                    return Err(Error::config(format!(
                        "marker '{word}' repeated in class {c}"
                    )));
                }
                if !seen_markers.insert(word) {
                    return Err(Error::config(format!(
                        "marker '{word}' appears in more than one lexicon"
                    )));
                }
            }
        }
        if self.fillers.is_empty() {
            return Err(Error::config("filler lexicon is empty"));
        }
        for word in &self.fillers {
            check_word(word, "filler")?;
            if seen_markers.contains(word.as_str()) {
                return Err(Error::config(format!(
                    "'{word}' is both a marker and a filler"
                )));
            }
        }
        if self.doc_len_min == 0 || self.doc_len_max < self.doc_len_min {
            return Err(Error::config(format!(
                "invalid document length bounds [{}, {}]",
                self.doc_len_min, self.doc_len_max
            )));
        }
        if self.train_per_class == 0 || self.test_per_class == 0 {
            return Err(Error::config("train and test sizes must be positive"));
        }
        if !self.obfuscation_rate.is_finite()
            || !(0.0..=1.0).contains(&self.obfuscation_rate)
        {
            return Err(Error::config(format!(
                "obfuscation rate {} outside [0, 1]",
                self.obfuscation_rate
            )));
        }
        Ok(())
    }
}

/// The shipped filler lexicon: common stopword-free English words.
pub fn default_fillers() -> Vec<String> {
    include_str!("../../data/fillers.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDocument {
    pub class: usize,
    pub tokens: Vec<String>,
    /// Base word per token: `Some` for obfuscated tokens, `None` otherwise.
    pub provenance: Vec<Option<String>>,
}

impl SyntheticDocument {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    /// Space-separated base words aligned with the tokens, "-" where the
    /// token is verbatim; `None` when nothing was obfuscated.
    pub fn provenance_column(&self) -> Option<String> {
        if self.provenance.iter().all(Option::is_none) {
            return None;
        }
        Some(
            self.provenance
                .iter()
                .map(|p| p.as_deref().unwrap_or("-"))
                .collect::<Vec<_>>()
                .join(" "),
        )
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Class label strings in class-index order.
    pub labels: Vec<String>,
    pub train: Vec<SyntheticDocument>,
    pub test: Vec<SyntheticDocument>,
}

impl SyntheticCorpus {
    fn records(&self, docs: &[SyntheticDocument], prefix: &str) -> Vec<Record> {
        docs.iter()
            .enumerate()
            .map(|(i, d)| Record {
                id: format!("{prefix}-{:04}", i + 1),
                label: self.labels[d.class].clone(),
                text: d.text(),
                provenance: d.provenance_column(),
            })
            .collect()
    }

    pub fn train_records(&self) -> Vec<Record> {
        self.records(&self.train, "train")
    }

    pub fn test_records(&self) -> Vec<Record> {
        self.records(&self.test, "test")
    }
}

/// Generates a corpus from the spec. Identical spec, identical corpus.
pub fn generate_corpus(spec: &SyntheticCorpusSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = rng_from_seed(derive_seed(spec.seed, "corpus"));
    let ops = standard_ops(&spec.fillers);

    let draw_doc = |class: usize, rng: &mut crate::rng::ChaCha8Rng| {
        let len = rng.gen_range(spec.doc_len_min..=spec.doc_len_max);
        let lexicon = &spec.marker_lexicons[class];
        let marker_at = rng.gen_range(0..len);
        let mut tokens = Vec::with_capacity(len);
        let mut is_marker = Vec::with_capacity(len);
        for i in 0..len {
            let marker = i == marker_at || rng.gen_bool(EXTRA_MARKER_RATE);
            let word = if marker {
                lexicon[rng.gen_range(0..lexicon.len())].clone()
            } else {
                spec.fillers[rng.gen_range(0..spec.fillers.len())].clone()
            };
            tokens.push(word);
            is_marker.push(marker);
        }
        (tokens, is_marker)
    };

    let mut train = Vec::with_capacity(spec.n_classes() * spec.train_per_class);
    for class in 0..spec.n_classes() {
        for _ in 0..spec.train_per_class {
            let (tokens, _) = draw_doc(class, &mut rng);
            let provenance = vec![None; tokens.len()];
            train.push(SyntheticDocument { class, tokens, provenance });
        }
    }
    train.shuffle(&mut rng);

    // Obfuscated forms must not land on anything the training split can
    // see, markers and fillers included, or the unseen-word dial would leak.
    let mut forbidden: BTreeSet<String> =
        train.iter().flat_map(|d| d.tokens.iter().cloned()).collect();
    forbidden.extend(spec.marker_lexicons.iter().flatten().cloned());
    forbidden.extend(spec.fillers.iter().cloned());

    let mut test = Vec::with_capacity(spec.n_classes() * spec.test_per_class);
    for class in 0..spec.n_classes() {
        for _ in 0..spec.test_per_class {
            let (mut tokens, is_marker) = draw_doc(class, &mut rng);
            let mut provenance = vec![None; tokens.len()];
            for (i, marker) in is_marker.iter().enumerate() {
                if !marker || !rng.gen_bool(spec.obfuscation_rate) {
                    continue;
                }
                for _ in 0..COLLISION_RETRIES {
                    let out = obfuscate_with(&tokens[i], &ops, &mut rng);
                    if !out.obfuscated {
                        break;
                    }
                    if !forbidden.contains(&out.word) {
                        provenance[i] = Some(tokens[i].clone());
                        tokens[i] = out.word;
                        break;
                    }
                }
            }
            test.push(SyntheticDocument { class, tokens, provenance });
        }
    }
    test.shuffle(&mut rng);

    if spec.obfuscation_rate == 1.0 {
        let train_vocab: BTreeSet<&String> =
            train.iter().flat_map(|d| d.tokens.iter()).collect();
        for doc in &test {
            for (token, base) in doc.tokens.iter().zip(&doc.provenance) {
                assert!(
                    base.is_none() || !train_vocab.contains(token),
                    "obfuscated test marker '{token}' leaked into the training vocabulary"
                );
                assert!(
                    base.is_some() || !spec.marker_lexicons[doc.class].contains(token),
                    "marker '{token}' escaped obfuscation at rate 1"
                );
            }
        }
    }

    Ok(SyntheticCorpus { labels: spec.class_names(), train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{read_dataset, write_dataset};

    fn lex(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn small_spec() -> SyntheticCorpusSpec {
        SyntheticCorpusSpec {
            marker_lexicons: vec![
                lex(&["wug", "fep", "daxy"]),
                lex(&["blick", "tove", "zorp"]),
            ],
            fillers: lex(&[
                "river", "stone", "cloud", "meadow", "lantern", "copper", "violin",
                "harbor", "saddle", "pepper", "marble", "willow",
            ]),
            doc_len_min: 4,
            doc_len_max: 9,
            train_per_class: 12,
            test_per_class: 8,
            obfuscation_rate: 0.0,
            seed: 5,
        }
    }

    #[test]
    fn overlapping_lexicons_are_rejected() {
        let mut spec = small_spec();
        spec.marker_lexicons[1].push("wug".to_string());
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("wug"), "{err}");
    }

    #[test]
    fn marker_filler_collision_is_rejected() {
        let mut spec = small_spec();
        spec.fillers.push("fep".to_string());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn stopword_markers_are_rejected() {
        let mut spec = small_spec();
        spec.marker_lexicons[0].push("the".to_string());
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("stopword"), "{err}");
    }

    #[test]
    fn unstable_tokens_are_rejected() {
        let mut spec = small_spec();
        spec.marker_lexicons[0].push("two words".to_string());
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.fillers.push("Upper".to_string());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn every_document_carries_a_marker_of_its_class() {
        let corpus = generate_corpus(&small_spec()).unwrap();
        let spec = small_spec();
        for doc in corpus.train.iter().chain(&corpus.test) {
            let lexicon = &spec.marker_lexicons[doc.class];
            assert!(
                doc.tokens.iter().any(|t| lexicon.contains(t)),
                "document without class marker: {:?}",
                doc.tokens
            );
            assert_eq!(doc.provenance.len(), doc.tokens.len());
        }
        assert_eq!(corpus.train.len(), 24);
        assert_eq!(corpus.test.len(), 16);
    }

    #[test]
    fn rate_zero_changes_nothing() {
        let corpus = generate_corpus(&small_spec()).unwrap();
        let spec = small_spec();
        let known: BTreeSet<&String> = spec
            .marker_lexicons
            .iter()
            .flatten()
            .chain(&spec.fillers)
            .collect();
        for doc in &corpus.test {
            assert!(doc.provenance.iter().all(Option::is_none));
            assert!(doc.tokens.iter().all(|t| known.contains(t)));
        }
    }

    #[test]
    fn rate_one_hides_every_test_marker() {
        let mut spec = small_spec();
        spec.obfuscation_rate = 1.0;
        let corpus = generate_corpus(&spec).unwrap();
        let train_vocab: BTreeSet<&String> =
            corpus.train.iter().flat_map(|d| d.tokens.iter()).collect();
        let mut obfuscated = 0;
        for doc in &corpus.test {
            for (token, base) in doc.tokens.iter().zip(&doc.provenance) {
                // No surface marker survives, and nothing obfuscated is
                // in the training vocabulary.
                assert!(!spec.marker_lexicons[doc.class].contains(token));
                if let Some(base) = base {
                    obfuscated += 1;
                    assert!(!train_vocab.contains(token));
                    assert!(spec.marker_lexicons[doc.class].contains(base));
                }
            }
        }
        assert!(obfuscated >= spec.test_per_class * 2, "{obfuscated} obfuscations");
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_corpus(&small_spec()).unwrap();
        let b = generate_corpus(&small_spec()).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let mut other = small_spec();
        other.seed = 6;
        let c = generate_corpus(&other).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn records_round_trip_through_the_dataset_format() {
        let mut spec = small_spec();
        spec.obfuscation_rate = 0.7;
        let corpus = generate_corpus(&spec).unwrap();
        let records = corpus.test_records();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &records).unwrap();
        let loaded = read_dataset(&buf[..]).unwrap();
        assert_eq!(loaded.records, records);
        // Shuffled docs, so first-seen order may differ; the label set must not.
        let seen: BTreeSet<&String> = loaded.labels.iter().collect();
        assert_eq!(seen, corpus.labels.iter().collect::<BTreeSet<_>>());
        // Aligned provenance: one entry per token wherever present.
        for (record, doc) in loaded.records.iter().zip(&corpus.test) {
            if let Some(column) = &record.provenance {
                assert_eq!(column.split(' ').count(), doc.tokens.len());
            }
        }
    }

    #[test]
    fn shipped_filler_lexicon_is_clean() {
        let fillers = default_fillers();
        assert!(fillers.len() >= 1000);
        let unique: BTreeSet<&String> = fillers.iter().collect();
        assert_eq!(unique.len(), fillers.len());
        let mut spec = small_spec();
        spec.fillers = fillers;
        spec.validate().unwrap();
    }
}
