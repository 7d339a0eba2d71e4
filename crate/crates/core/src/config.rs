//! Run configuration: one flat `key = value` surface shared by config
//! files, CLI overrides, and the container's config section.
//!
//! `dump` emits every key in a fixed order and `apply` parses any of them
//! back, so a saved container reproduces the exact configuration that
//! trained it. Seeds for individual components are derived from the master
//! seed at training time; only the master seed is configured here.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::gbdt::GbdtConfig;
use crate::models::{C2wConfig, ComposerConfig, ComposerVariant, ContextConfig, Method, RecurrentConfig};
use crate::text::NgramScope;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Word embedding dimension.
    pub dim: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub ngram_scope: NgramScope,
    pub ngram_min_count: u64,
    pub seed: u64,
    pub folds: usize,
    /// Train share of the one-shot split protocol.
    pub train_fraction: f64,
    /// Repeated runs (distinct seeds) per benchmark invocation.
    pub bench_seeds: usize,
    pub recurrent: RecurrentConfig,
    pub composer: ComposerConfig,
    pub encoder_hidden: usize,
    pub encoder_layers: usize,
    pub c2w: C2wConfig,
    pub gbdt: GbdtConfig,
    /// Grid-search the boosted-tree hyperparameters instead of using the
    /// fixed values above.
    pub tune_gbdt: bool,
    pub embeddings: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(method: Method) -> Self {
        RunConfig {
            method,
            dim: 200,
            ngram_min: 1,
            ngram_max: 5,
            ngram_scope: NgramScope::Text,
            ngram_min_count: 1,
            seed: 1,
            folds: 10,
            train_fraction: 0.6,
            bench_seeds: 5,
            recurrent: RecurrentConfig::default(),
            composer: ComposerConfig::default(),
            encoder_hidden: 64,
            encoder_layers: 1,
            c2w: C2wConfig::default(),
            gbdt: GbdtConfig::default(),
            tune_gbdt: false,
            embeddings: None,
            stopwords: None,
        }
    }

    pub fn context(&self) -> ContextConfig {
        ContextConfig {
            encoder_hidden: self.encoder_hidden,
            encoder_layers: self.encoder_layers,
            composer: self.composer.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
            Ok(())
        }
        fn fraction(name: &str, v: f64) -> Result<()> {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(format!("{name} must lie strictly between 0 and 1")));
            }
            Ok(())
        }
        fn rate(name: &str, v: f64) -> Result<()> {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1)")));
            }
            Ok(())
        }
        positive("dim", self.dim)?;
        if self.ngram_min < 1 || self.ngram_min > self.ngram_max {
            return Err(Error::config(format!(
                "invalid n-gram range [{}, {}]",
                self.ngram_min, self.ngram_max
            )));
        }
        positive("ngram-min-count", self.ngram_min_count as usize)?;
        if self.folds < 2 {
            return Err(Error::config("folds must be at least 2"));
        }
        fraction("train-fraction", self.train_fraction)?;
        positive("bench-seeds", self.bench_seeds)?;
        positive("rnn-hidden", self.recurrent.hidden)?;
        positive("rnn-layers", self.recurrent.layers)?;
        rate("rnn-dropout", self.recurrent.dropout)?;
        positive("rnn-max-epochs", self.recurrent.max_epochs)?;
        positive("rnn-patience", self.recurrent.patience)?;
        positive("composer-hidden", self.composer.hidden_dim)?;
        rate("composer-dropout", self.composer.dropout)?;
        positive("composer-max-epochs", self.composer.max_epochs)?;
        positive("composer-patience", self.composer.patience)?;
        match self.composer.variant {
            ComposerVariant::BiLstm => {
                positive("composer-lstm-hidden", self.composer.lstm_hidden)?;
                positive("composer-lstm-layers", self.composer.lstm_layers)?;
            }
            ComposerVariant::Cnn => {
                if self.composer.conv_widths.is_empty() {
                    return Err(Error::config("composer-conv-widths must not be empty"));
                }
                for &w in &self.composer.conv_widths {
                    positive("composer-conv-widths entry", w)?;
                }
                positive("composer-conv-filters", self.composer.conv_filters)?;
            }
        }
        positive("encoder-hidden", self.encoder_hidden)?;
        positive("encoder-layers", self.encoder_layers)?;
        positive("c2w-lstm-hidden", self.c2w.lstm_hidden)?;
        positive("c2w-lstm-layers", self.c2w.lstm_layers)?;
        positive("c2w-embed-dim", self.c2w.embed_dim)?;
        positive("c2w-gru-hidden", self.c2w.gru_hidden)?;
        positive("c2w-gru-layers", self.c2w.gru_layers)?;
        rate("c2w-dropout", self.c2w.dropout)?;
        positive("gbdt-rounds", self.gbdt.rounds)?;
        positive("gbdt-max-depth", self.gbdt.max_depth)?;
        positive("gbdt-min-leaf", self.gbdt.min_leaf)?;
        for (name, v) in [
            ("rnn-learning-rate", self.recurrent.learning_rate),
            ("composer-learning-rate", self.composer.learning_rate),
            ("c2w-learning-rate", self.c2w.learning_rate),
            ("gbdt-learning-rate", self.gbdt.learning_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.gbdt.lambda < 0.0 || !self.gbdt.lambda.is_finite() {
            return Err(Error::config("gbdt-lambda must be non-negative"));
        }
        rate("rnn-val-fraction", self.recurrent.val_fraction)?;
        rate("composer-holdout", self.composer.holdout_fraction)?;
        rate("c2w-val-fraction", self.c2w.val_fraction)?;
        Ok(())
    }

    /// Applies one `key = value` assignment. Unknown keys and unparsable
    /// values are invalid-config errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "method" => self.method = value.parse()?,
            "dim" => self.dim = parse(key, value)?,
            "ngram-min" => self.ngram_min = parse(key, value)?,
            "ngram-max" => self.ngram_max = parse(key, value)?,
            "ngram-scope" => {
                self.ngram_scope = match value {
                    "text" => NgramScope::Text,
                    "token" => NgramScope::Token,
                    _ => return Err(Error::config(format!("bad value {value:?} for ngram-scope"))),
                }
            }
            "ngram-min-count" => self.ngram_min_count = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "folds" => self.folds = parse(key, value)?,
            "train-fraction" => self.train_fraction = parse(key, value)?,
            "bench-seeds" => self.bench_seeds = parse(key, value)?,
            "rnn-hidden" => self.recurrent.hidden = parse(key, value)?,
            "rnn-layers" => self.recurrent.layers = parse(key, value)?,
            "rnn-dropout" => self.recurrent.dropout = parse(key, value)?,
            "rnn-learning-rate" => self.recurrent.learning_rate = parse(key, value)?,
            "rnn-val-fraction" => self.recurrent.val_fraction = parse(key, value)?,
            "rnn-max-epochs" => self.recurrent.max_epochs = parse(key, value)?,
            "rnn-patience" => self.recurrent.patience = parse(key, value)?,
            "composer-variant" => {
                self.composer.variant = match value {
                    "bilstm" => ComposerVariant::BiLstm,
                    "cnn" => ComposerVariant::Cnn,
                    _ => {
                        return Err(Error::config(format!(
                            "bad value {value:?} for composer-variant"
                        )))
                    }
                }
            }
            "composer-lstm-hidden" => self.composer.lstm_hidden = parse(key, value)?,
            "composer-lstm-layers" => self.composer.lstm_layers = parse(key, value)?,
            "composer-conv-widths" => {
                let widths: Result<Vec<usize>> = value
                    .split(',')
                    .map(|w| parse(key, w.trim()))
                    .collect();
                self.composer.conv_widths = widths?;
            }
            "composer-conv-filters" => self.composer.conv_filters = parse(key, value)?,
            "composer-hidden" => self.composer.hidden_dim = parse(key, value)?,
            "composer-dropout" => self.composer.dropout = parse(key, value)?,
            "composer-learning-rate" => self.composer.learning_rate = parse(key, value)?,
            "composer-holdout" => self.composer.holdout_fraction = parse(key, value)?,
            "composer-max-epochs" => self.composer.max_epochs = parse(key, value)?,
            "composer-patience" => self.composer.patience = parse(key, value)?,
            "encoder-hidden" => self.encoder_hidden = parse(key, value)?,
            "encoder-layers" => self.encoder_layers = parse(key, value)?,
            "c2w-lstm-hidden" => self.c2w.lstm_hidden = parse(key, value)?,
            "c2w-lstm-layers" => self.c2w.lstm_layers = parse(key, value)?,
            "c2w-embed-dim" => self.c2w.embed_dim = parse(key, value)?,
            "c2w-gru-hidden" => self.c2w.gru_hidden = parse(key, value)?,
            "c2w-gru-layers" => self.c2w.gru_layers = parse(key, value)?,
            "c2w-dropout" => self.c2w.dropout = parse(key, value)?,
            "c2w-learning-rate" => self.c2w.learning_rate = parse(key, value)?,
            "c2w-val-fraction" => self.c2w.val_fraction = parse(key, value)?,
            "c2w-max-epochs" => self.c2w.max_epochs = parse(key, value)?,
            "c2w-patience" => self.c2w.patience = parse(key, value)?,
            "gbdt-rounds" => self.gbdt.rounds = parse(key, value)?,
            "gbdt-learning-rate" => self.gbdt.learning_rate = parse(key, value)?,
            "gbdt-max-depth" => self.gbdt.max_depth = parse(key, value)?,
            "gbdt-min-leaf" => self.gbdt.min_leaf = parse(key, value)?,
            "gbdt-lambda" => self.gbdt.lambda = parse(key, value)?,
            "tune-gbdt" => self.tune_gbdt = parse(key, value)?,
            "embeddings" => self.embeddings = Some(PathBuf::from(value)),
            "stopwords" => self.stopwords = Some(PathBuf::from(value)),
            _ => return Err(Error::config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a whole config file: `key = value` lines, `#` comments,
    /// blank lines ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(i + 1, "expected 'key = value'"))?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| match e {
                    Error::InvalidConfig(msg) => Error::format(i + 1, msg),
                    other => other,
                })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    /// Canonical dump; `apply_text` on the output reproduces the config.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("method", self.method.name().to_string());
        kv("dim", self.dim.to_string());
        kv("ngram-min", self.ngram_min.to_string());
        kv("ngram-max", self.ngram_max.to_string());
        kv(
            "ngram-scope",
            match self.ngram_scope {
                NgramScope::Text => "text".to_string(),
                NgramScope::Token => "token".to_string(),
            },
        );
        kv("ngram-min-count", self.ngram_min_count.to_string());
        kv("seed", self.seed.to_string());
        kv("folds", self.folds.to_string());
        kv("train-fraction", self.train_fraction.to_string());
        kv("bench-seeds", self.bench_seeds.to_string());
        kv("rnn-hidden", self.recurrent.hidden.to_string());
        kv("rnn-layers", self.recurrent.layers.to_string());
        kv("rnn-dropout", self.recurrent.dropout.to_string());
        kv("rnn-learning-rate", self.recurrent.learning_rate.to_string());
        kv("rnn-val-fraction", self.recurrent.val_fraction.to_string());
        kv("rnn-max-epochs", self.recurrent.max_epochs.to_string());
        kv("rnn-patience", self.recurrent.patience.to_string());
        kv(
            "composer-variant",
            match self.composer.variant {
                ComposerVariant::BiLstm => "bilstm".to_string(),
                ComposerVariant::Cnn => "cnn".to_string(),
            },
        );
        kv("composer-lstm-hidden", self.composer.lstm_hidden.to_string());
        kv("composer-lstm-layers", self.composer.lstm_layers.to_string());
        kv(
            "composer-conv-widths",
            self.composer
                .conv_widths
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("composer-conv-filters", self.composer.conv_filters.to_string());
        kv("composer-hidden", self.composer.hidden_dim.to_string());
        kv("composer-dropout", self.composer.dropout.to_string());
        kv("composer-learning-rate", self.composer.learning_rate.to_string());
        kv("composer-holdout", self.composer.holdout_fraction.to_string());
        kv("composer-max-epochs", self.composer.max_epochs.to_string());
        kv("composer-patience", self.composer.patience.to_string());
        kv("encoder-hidden", self.encoder_hidden.to_string());
        kv("encoder-layers", self.encoder_layers.to_string());
        kv("c2w-lstm-hidden", self.c2w.lstm_hidden.to_string());
        kv("c2w-lstm-layers", self.c2w.lstm_layers.to_string());
        kv("c2w-embed-dim", self.c2w.embed_dim.to_string());
        kv("c2w-gru-hidden", self.c2w.gru_hidden.to_string());
        kv("c2w-gru-layers", self.c2w.gru_layers.to_string());
        kv("c2w-dropout", self.c2w.dropout.to_string());
        kv("c2w-learning-rate", self.c2w.learning_rate.to_string());
        kv("c2w-val-fraction", self.c2w.val_fraction.to_string());
        kv("c2w-max-epochs", self.c2w.max_epochs.to_string());
        kv("c2w-patience", self.c2w.patience.to_string());
        kv("gbdt-rounds", self.gbdt.rounds.to_string());
        kv("gbdt-learning-rate", self.gbdt.learning_rate.to_string());
        kv("gbdt-max-depth", self.gbdt.max_depth.to_string());
        kv("gbdt-min-leaf", self.gbdt.min_leaf.to_string());
        kv("gbdt-lambda", self.gbdt.lambda.to_string());
        kv("tune-gbdt", self.tune_gbdt.to_string());
        if let Some(p) = &self.embeddings {
            kv("embeddings", p.display().to_string());
        }
        if let Some(p) = &self.stopwords {
            kv("stopwords", p.display().to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_apply_round_trips() {
        let mut config = RunConfig::new(Method::AugmentedWsCng);
        config.dim = 32;
        config.seed = 99;
        config.composer.variant = ComposerVariant::Cnn;
        config.composer.conv_widths = vec![2, 3];
        config.embeddings = Some(PathBuf::from("vectors.txt"));
        let mut back = RunConfig::new(Method::Hs);
        back.apply_text(&config.dump()).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn file_syntax_comments_and_blanks() {
        let mut config = RunConfig::new(Method::Ws);
        config
            .apply_text("# a comment\n\nseed = 7\n  dim=16  \n")
            .unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.dim, 16);
    }

    #[test]
    fn bad_lines_name_the_line() {
        let mut config = RunConfig::new(Method::Ws);
        match config.apply_text("seed = 7\nnot an assignment\n").unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
        match config.apply_text("seed = banana\n").unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, Some(1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            config.apply("no-such-key", "1"),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn validate_catches_nonsense() {
        let good = RunConfig::new(Method::ContextHsCng);
        good.validate().unwrap();
        for (key, value) in [
            ("dim", "0"),
            ("ngram-min", "0"),
            ("ngram-max", "0"),
            ("folds", "1"),
            ("train-fraction", "1.5"),
            ("rnn-dropout", "1"),
            ("gbdt-learning-rate", "0"),
            ("composer-holdout", "-0.1"),
        ] {
            let mut bad = good.clone();
            bad.apply(key, value).unwrap();
            assert!(bad.validate().is_err(), "{key} = {value} passed");
        }
    }

    #[test]
    fn scope_and_variant_spellings() {
        let mut config = RunConfig::new(Method::Ws);
        config.apply("ngram-scope", "token").unwrap();
        assert_eq!(config.ngram_scope, NgramScope::Token);
        assert!(config.apply("ngram-scope", "chars").is_err());
        config.apply("composer-variant", "cnn").unwrap();
        assert!(config.apply("composer-variant", "lstm").is_err());
    }
}
