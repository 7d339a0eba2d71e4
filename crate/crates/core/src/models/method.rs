//! Method tags and prediction dispatch.
//!
//! Ten methods share a handful of trained components. The word-embedding
//! family runs a GRU classifier over (possibly composed) embeddings; the
//! char family replaces the embedding table with a character-to-word
//! encoder; the GBDT family classifies feature bundles instead of using
//! the softmax layer.

use std::fmt;
use std::str::FromStr;

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::gbdt::GbdtEnsemble;
use crate::text::{NgramVectorizer, NormalizedText, WordVocab};

use super::c2w::C2wModel;
use super::compose::CompositionModel;
use super::context::ContextEncoder;
use super::features::{build_feature_bundle, BundleParts};
use super::recurrent::{ws_feature_rows, RecurrentClassifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Hs,
    CharHs,
    HsCng,
    AugmentedHsCng,
    ContextHsCng,
    Ws,
    CharWs,
    WsCng,
    AugmentedWsCng,
    ContextWsCng,
}

pub const ALL_METHODS: [Method; 10] = [
    Method::Hs,
    Method::CharHs,
    Method::HsCng,
    Method::AugmentedHsCng,
    Method::ContextHsCng,
    Method::Ws,
    Method::CharWs,
    Method::WsCng,
    Method::AugmentedWsCng,
    Method::ContextWsCng,
];

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hs => "hs",
            Method::CharHs => "char-hs",
            Method::HsCng => "hs-cng",
            Method::AugmentedHsCng => "augmented-hs-cng",
            Method::ContextHsCng => "context-hs-cng",
            Method::Ws => "ws",
            Method::CharWs => "char-ws",
            Method::WsCng => "ws-cng",
            Method::AugmentedWsCng => "augmented-ws-cng",
            Method::ContextWsCng => "context-ws-cng",
        }
    }

    /// Character-level methods: no word embedding table.
    pub fn is_char(self) -> bool {
        matches!(self, Method::CharHs | Method::CharWs)
    }

    /// Everything except plain HS and CHAR HS classifies with the GBDT.
    pub fn uses_gbdt(self) -> bool {
        !matches!(self, Method::Hs | Method::CharHs)
    }

    pub fn uses_ngrams(self) -> bool {
        matches!(
            self,
            Method::HsCng
                | Method::AugmentedHsCng
                | Method::ContextHsCng
                | Method::WsCng
                | Method::AugmentedWsCng
                | Method::ContextWsCng
        )
    }

    /// Substitutes composed embeddings for unseen words.
    pub fn uses_composer(self) -> bool {
        matches!(
            self,
            Method::AugmentedHsCng
                | Method::AugmentedWsCng
                | Method::ContextHsCng
                | Method::ContextWsCng
        )
    }

    pub fn uses_context(self) -> bool {
        matches!(self, Method::ContextHsCng | Method::ContextWsCng)
    }

    /// Base feature is the classifier's last hidden state (vs the
    /// normalized embedding sum).
    pub fn uses_last_hidden(self) -> bool {
        matches!(
            self,
            Method::Hs | Method::HsCng | Method::AugmentedHsCng | Method::ContextHsCng
        )
    }

    /// Needs the GRU classifier and tuned embedding table.
    pub fn uses_word_embeddings(self) -> bool {
        !self.is_char()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        ALL_METHODS
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown method '{s}'")))
    }
}

/// Everything a method might need at prediction time. Unused fields may be
/// left empty; missing required ones are an invalid-config error.
#[derive(Debug, Clone)]
pub struct TrainedComponents {
    pub method: Method,
    pub n_classes: usize,
    pub vocab: WordVocab,
    pub table: Option<EmbeddingTable>,
    pub classifier: Option<RecurrentClassifier>,
    pub c2w: Option<C2wModel>,
    pub vectorizer: Option<NgramVectorizer>,
    pub composer: Option<CompositionModel>,
    pub encoder: Option<ContextEncoder>,
    pub gbdt: Option<GbdtEnsemble>,
}

impl TrainedComponents {
    fn missing(&self, what: &str) -> Error {
        Error::config(format!("{} requires a trained {what}", self.method))
    }

    fn table(&self) -> Result<&EmbeddingTable> {
        self.table.as_ref().ok_or_else(|| self.missing("embedding table"))
    }

    fn classifier(&self) -> Result<&RecurrentClassifier> {
        self.classifier.as_ref().ok_or_else(|| self.missing("recurrent classifier"))
    }

    fn c2w(&self) -> Result<&C2wModel> {
        self.c2w.as_ref().ok_or_else(|| self.missing("character-to-word model"))
    }

    fn gbdt(&self) -> Result<&GbdtEnsemble> {
        self.gbdt.as_ref().ok_or_else(|| self.missing("boosted-tree classifier"))
    }

    pub fn bundle_parts(&self) -> Result<BundleParts<'_>> {
        Ok(BundleParts {
            classifier: self.classifier()?,
            table: self.table()?,
            vocab: &self.vocab,
            vectorizer: self.vectorizer.as_ref(),
            composer: self.composer.as_ref(),
            encoder: self.encoder.as_ref(),
        })
    }

    /// Class distribution for a normalized text under this method.
    pub fn predict(&self, text: &NormalizedText) -> Result<Vec<f64>> {
        match self.method {
            Method::Hs => {
                self.classifier()?.predict(&text.tokens, self.table()?, &self.vocab)
            }
            Method::CharHs => self.c2w()?.predict(&text.tokens),
            Method::CharWs => {
                let c2w = self.c2w()?;
                let embeds = c2w.intermediate_embeddings(&text.tokens)?;
                let feature = ws_feature_rows(&embeds, c2w.embed_dim());
                self.gbdt()?.predict(&feature)
            }
            _ => {
                let bundle = build_feature_bundle(self.method, text, &self.bundle_parts()?)?;
                self.gbdt()?.predict(&bundle.vector)
            }
        }
    }

    pub fn predict_class(&self, text: &NormalizedText) -> Result<usize> {
        Ok(crate::gbdt::argmax(&self.predict(text)?))
    }
}
