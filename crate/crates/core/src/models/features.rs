//! Document feature bundles for the tree-boosted classifiers.
//!
//! The base vector is either the recurrent classifier's last hidden state or
//! the L2-normalized embedding sum; +CNG variants append the n-gram vector.
//! AUGMENTED and CONTEXT variants substitute composed embeddings for
//! out-of-vocabulary words before the base vector is computed; all other
//! methods fall back to the OOV row.

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::text::{NgramVectorizer, NormalizedText, WordVocab};

use super::compose::CompositionModel;
use super::context::{encode_tokens, compose_span, ContextEncoder};
use super::method::Method;
use super::recurrent::{ws_feature_rows, RecurrentClassifier};

#[derive(Clone, Copy)]
pub enum Augmenter<'a> {
    OneHot(&'a CompositionModel),
    Context {
        encoder: &'a ContextEncoder,
        composer: &'a CompositionModel,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub method: Method,
    pub vector: Vec<f64>,
}

/// One embedding row per token. Unseen words take the composed embedding
/// when an augmenter is given, the OOV row otherwise. Empty texts give no
/// rows.
pub fn doc_rows(
    tokens: &[String],
    table: &EmbeddingTable,
    vocab: &WordVocab,
    augmenter: Option<&Augmenter>,
) -> Result<Vec<Vec<f64>>> {
    let mut encoded = None;
    let mut rows = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        if vocab.contains(token) {
            rows.push(table.row(vocab.encode(token)).to_vec());
            continue;
        }
        match augmenter {
            None => rows.push(table.row(table.oov_index()).to_vec()),
            Some(Augmenter::OneHot(composer)) => rows.push(composer.compose_word(token)?),
            Some(Augmenter::Context { encoder, composer }) => {
                if encoded.is_none() {
                    encoded = Some(encode_tokens(encoder, tokens)?);
                }
                rows.push(compose_span(composer, encoded.as_ref().unwrap(), i)?);
            }
        }
    }
    Ok(rows)
}

pub struct BundleParts<'a> {
    pub classifier: &'a RecurrentClassifier,
    pub table: &'a EmbeddingTable,
    pub vocab: &'a WordVocab,
    pub vectorizer: Option<&'a NgramVectorizer>,
    pub composer: Option<&'a CompositionModel>,
    pub encoder: Option<&'a ContextEncoder>,
}

impl<'a> BundleParts<'a> {
    fn augmenter_for(&self, method: Method) -> Result<Option<Augmenter<'a>>> {
        if method.uses_context() {
            let composer = self.composer.ok_or_else(|| {
                Error::config(format!("{method} requires a trained composition model"))
            })?;
            let encoder = self.encoder.ok_or_else(|| {
                Error::config(format!("{method} requires a trained context encoder"))
            })?;
            Ok(Some(Augmenter::Context { encoder, composer }))
        } else if method.uses_composer() {
            let composer = self.composer.ok_or_else(|| {
                Error::config(format!("{method} requires a trained composition model"))
            })?;
            Ok(Some(Augmenter::OneHot(composer)))
        } else {
            Ok(None)
        }
    }
}

/// Builds the feature vector that `method` feeds to the GBDT.
pub fn build_feature_bundle(
    method: Method,
    text: &NormalizedText,
    parts: &BundleParts,
) -> Result<FeatureBundle> {
    if method.is_char() || !method.uses_gbdt() {
        return Err(Error::config(format!(
            "{method} does not use word-embedding feature bundles"
        )));
    }
    let augmenter = parts.augmenter_for(method)?;
    let rows = doc_rows(&text.tokens, parts.table, parts.vocab, augmenter.as_ref())?;
    let mut vector = if method.uses_last_hidden() {
        let padded;
        let rows_ref = if rows.is_empty() {
            padded = vec![parts.table.row(parts.table.oov_index()).to_vec()];
            &padded
        } else {
            &rows
        };
        parts.classifier.hidden_state(rows_ref)?
    } else {
        ws_feature_rows(&rows, parts.table.dim)
    };
    if method.uses_ngrams() {
        let vectorizer = parts
            .vectorizer
            .ok_or_else(|| Error::config(format!("{method} requires a fitted n-gram vectorizer")))?;
        vector.extend(vectorizer.transform(text));
    }
    Ok(FeatureBundle { method, vector })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::compose::{ComposerConfig, ComposerVariant};
    use crate::models::context::ContextConfig;
    use crate::models::recurrent::{train_recurrent, RecurrentConfig};
    use crate::rng::rng_from_seed;
    use crate::text::{normalize_and_tokenize, NgramScope};

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    struct Fixture {
        vocab: WordVocab,
        table: EmbeddingTable,
        classifier: RecurrentClassifier,
        vectorizer: NgramVectorizer,
        composer: CompositionModel,
        encoder: ContextEncoder,
        ctx_composer: CompositionModel,
    }

    fn fixture() -> Fixture {
        let stop = std::collections::BTreeSet::new();
        let raw = [
            "red apple basket", "green apple crate", "red berry basket",
            "green berry crate", "blue plum basket", "blue grape crate",
            "red plum box", "green grape box", "blue apple box",
            "red grape basket", "green plum crate", "blue berry box",
        ];
        let texts: Vec<NormalizedText> =
            raw.iter().map(|t| normalize_and_tokenize(t, &stop)).collect();
        let docs: Vec<Vec<String>> = texts.iter().map(|t| t.tokens.clone()).collect();
        let labels: Vec<usize> = (0..docs.len()).map(|i| i % 2).collect();
        let vocab = WordVocab::build(&texts).unwrap();
        let mut rng = rng_from_seed(30);
        let mut table = EmbeddingTable::random_init(&vocab, 6, &mut rng).unwrap();
        let config = RecurrentConfig {
            hidden: 8,
            layers: 2,
            dropout: 0.0,
            learning_rate: 0.01,
            val_fraction: 0.0,
            max_epochs: 2,
            patience: 2,
            seed: 31,
        };
        let classifier = train_recurrent(&docs, &labels, &mut table, &vocab, &config).unwrap();
        let vectorizer = NgramVectorizer::fit(&texts, 2, 3, NgramScope::Token, 1).unwrap();
        let composer_cfg = ComposerConfig {
            variant: ComposerVariant::BiLstm,
            lstm_hidden: 5,
            lstm_layers: 1,
            conv_widths: vec![1, 2],
            conv_filters: 3,
            hidden_dim: 6,
            dropout: 0.0,
            learning_rate: 1e-3,
            holdout_fraction: 0.1,
            max_epochs: 1,
            patience: 1,
            seed: 32,
        };
        let composer = CompositionModel::new(crate::text::CHAR_DIM, 6, &composer_cfg).unwrap();
        let ctx_cfg = ContextConfig {
            encoder_hidden: 5,
            encoder_layers: 1,
            composer: composer_cfg,
        };
        let encoder = ContextEncoder::new(&ctx_cfg).unwrap();
        let ctx_composer =
            CompositionModel::new(encoder.rep_dim(), 6, &ctx_cfg.composer).unwrap();
        Fixture { vocab, table, classifier, vectorizer, composer, encoder, ctx_composer }
    }

    fn parts<'a>(f: &'a Fixture, with_ngrams: bool) -> BundleParts<'a> {
        BundleParts {
            classifier: &f.classifier,
            table: &f.table,
            vocab: &f.vocab,
            vectorizer: with_ngrams.then_some(&f.vectorizer),
            composer: Some(&f.composer),
            encoder: Some(&f.encoder),
        }
    }

    #[test]
    fn bundle_length_is_base_plus_columns() {
        let f = fixture();
        let text = NormalizedText::from_tokens(toks("red apple basket"));
        let p = parts(&f, true);
        let hs = build_feature_bundle(Method::HsCng, &text, &p).unwrap();
        assert_eq!(hs.vector.len(), f.classifier.hidden_dim() + f.vectorizer.dim());
        let ws = build_feature_bundle(Method::WsCng, &text, &p).unwrap();
        assert_eq!(ws.vector.len(), f.table.dim + f.vectorizer.dim());
        let plain_ws = build_feature_bundle(Method::Ws, &text, &p).unwrap();
        assert_eq!(plain_ws.vector.len(), f.table.dim);
    }

    #[test]
    fn no_unseen_words_means_augmented_equals_plain() {
        let f = fixture();
        let text = NormalizedText::from_tokens(toks("green apple crate"));
        let p = parts(&f, true);
        let plain = build_feature_bundle(Method::HsCng, &text, &p).unwrap();
        let augmented = build_feature_bundle(Method::AugmentedHsCng, &text, &p).unwrap();
        assert_eq!(plain.vector, augmented.vector);
        let plain = build_feature_bundle(Method::WsCng, &text, &p).unwrap();
        let augmented = build_feature_bundle(Method::AugmentedWsCng, &text, &p).unwrap();
        assert_eq!(plain.vector, augmented.vector);
    }

    #[test]
    fn unseen_words_change_augmented_bundles_only() {
        let f = fixture();
        let text = NormalizedText::from_tokens(toks("red appl3 basket"));
        let p = parts(&f, true);
        let plain = build_feature_bundle(Method::WsCng, &text, &p).unwrap();
        let augmented = build_feature_bundle(Method::AugmentedWsCng, &text, &p).unwrap();
        assert_ne!(plain.vector, augmented.vector);
        // The n-gram tail is untouched by substitution.
        assert_eq!(
            plain.vector[f.table.dim..],
            augmented.vector[f.table.dim..]
        );
    }

    #[test]
    fn all_unseen_words_compose_every_row() {
        let f = fixture();
        let tokens = toks("zzzq yyyx");
        let aug = Augmenter::OneHot(&f.composer);
        let rows = doc_rows(&tokens, &f.table, &f.vocab, Some(&aug)).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let composed = f.composer.compose_word(&tokens[i]).unwrap();
            assert_eq!(row, &composed);
        }
    }

    #[test]
    fn missing_components_rejected() {
        let f = fixture();
        let text = NormalizedText::from_tokens(toks("red apple"));
        let mut p = parts(&f, true);
        p.composer = None;
        let err = build_feature_bundle(Method::AugmentedWsCng, &text, &p).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let mut p = parts(&f, true);
        p.encoder = None;
        let err = build_feature_bundle(Method::ContextHsCng, &text, &p).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let p = parts(&f, false);
        let err = build_feature_bundle(Method::WsCng, &text, &p).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let p = parts(&f, true);
        let err = build_feature_bundle(Method::Hs, &text, &p).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn empty_text_gives_zero_ws_and_oov_hs() {
        let f = fixture();
        let text = NormalizedText::from_tokens(vec![]);
        let p = parts(&f, true);
        let ws = build_feature_bundle(Method::Ws, &text, &p).unwrap();
        assert!(ws.vector.iter().all(|v| *v == 0.0));
        let hs = build_feature_bundle(Method::HsCng, &text, &p).unwrap();
        let oov_row = f.table.row(f.table.oov_index()).to_vec();
        let expect = f.classifier.hidden_state(&[oov_row]).unwrap();
        assert_eq!(hs.vector[..f.classifier.hidden_dim()], expect[..]);
    }

    #[test]
    fn context_substitution_uses_span_composition() {
        let f = fixture();
        let tokens = toks("red zzzq basket");
        let aug = Augmenter::Context { encoder: &f.encoder, composer: &f.ctx_composer };
        let rows = doc_rows(&tokens, &f.table, &f.vocab, Some(&aug)).unwrap();
        let encoded = encode_tokens(&f.encoder, &tokens).unwrap();
        let expect = compose_span(&f.ctx_composer, &encoded, 1).unwrap();
        assert_eq!(rows[1], expect);
        assert_eq!(rows[0], f.table.row(f.vocab.encode("red")).to_vec());
    }
}
