//! Word vocabulary with a reserved out-of-vocabulary index.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::text::tokenize::NormalizedText;

pub const OOV_TOKEN: &str = "<oov>";

/// Real words occupy 0..n in first-seen order; the OOV index is n, matching
/// the embedding-table convention of one extra final row.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVocab {
    word_to_index: BTreeMap<String, usize>,
    index_to_word: Vec<String>,
    freq: Vec<u64>,
}

impl WordVocab {
    pub fn build(corpus: &[NormalizedText]) -> Result<WordVocab> {
        if corpus.is_empty() {
            return Err(Error::input("empty corpus"));
        }
        let mut vocab = WordVocab {
            word_to_index: BTreeMap::new(),
            index_to_word: Vec::new(),
            freq: Vec::new(),
        };
        for text in corpus {
            for tok in &text.tokens {
                match vocab.word_to_index.get(tok) {
                    Some(&idx) => vocab.freq[idx] += 1,
                    None => {
                        let idx = vocab.index_to_word.len();
                        vocab.word_to_index.insert(tok.clone(), idx);
                        vocab.index_to_word.push(tok.clone());
                        vocab.freq.push(1);
                    }
                }
            }
        }
        Ok(vocab)
    }

    /// Reassembles a vocabulary from its serialized parts (real words only).
    pub fn from_parts(words: Vec<String>, freqs: Vec<u64>) -> Result<WordVocab> {
        if words.len() != freqs.len() {
            return Err(Error::Container("vocab word/frequency length mismatch".into()));
        }
        let mut word_to_index = BTreeMap::new();
        for (idx, w) in words.iter().enumerate() {
            if w == OOV_TOKEN {
                return Err(Error::Container("OOV token stored as a real word".into()));
            }
            if word_to_index.insert(w.clone(), idx).is_some() {
                return Err(Error::Container(format!("duplicate vocab word {w}")));
            }
        }
        Ok(WordVocab { word_to_index, index_to_word: words, freq: freqs })
    }

    /// Number of real words, excluding the OOV slot.
    pub fn word_count(&self) -> usize {
        self.index_to_word.len()
    }

    /// Total entries including the OOV slot; equals the embedding row count.
    pub fn len(&self) -> usize {
        self.index_to_word.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_word.is_empty()
    }

    pub fn oov_index(&self) -> usize {
        self.index_to_word.len()
    }

    pub fn encode(&self, word: &str) -> usize {
        self.word_to_index
            .get(word)
            .copied()
            .unwrap_or_else(|| self.oov_index())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.word_to_index.contains_key(word)
    }

    pub fn word(&self, index: usize) -> &str {
        if index == self.oov_index() {
            OOV_TOKEN
        } else {
            &self.index_to_word[index]
        }
    }

    pub fn frequency(&self, index: usize) -> u64 {
        if index == self.oov_index() {
            0
        } else {
            self.freq[index]
        }
    }

    /// Real-word indices in storage order.
    pub fn word_indices(&self) -> impl Iterator<Item = usize> {
        0..self.index_to_word.len()
    }

    pub fn words(&self) -> &[String] {
        &self.index_to_word
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.freq
    }
}
