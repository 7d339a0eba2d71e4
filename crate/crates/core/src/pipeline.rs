//! Training orchestration shared by the CLI and the benchmark harness.
//!
//! A method is trained in two stages: the neural components (embedding
//! table, recurrent classifier, composer, context encoder, char model) and
//! then, for methods that classify with boosted trees, the GBDT over the
//! frozen feature bundles. All learned parameters are rounded through f32
//! before features are extracted or predictions made, so a model behaves
//! bit-identically before saving and after loading.
//!
//! Component seeds derive from the master seed by label, which keeps any
//! two methods trained with the same seed on the same split sharing
//! identical tables, classifiers, and composers.

use std::collections::BTreeSet;
use std::path::Path;

use crate::config::RunConfig;
use crate::container::{
    decode_bilstm, decode_c2w, decode_composer, decode_gbdt, decode_recurrent, decode_table,
    decode_vectorizer, decode_vocab, encode_bilstm, encode_c2w, encode_composer, encode_gbdt,
    encode_recurrent, encode_table, encode_vectorizer, encode_vocab, Container, Reader, Writer,
};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, stratified_kfold, stratified_split, MetricsReport};
use crate::gbdt::{gbdt_train, grid_search_train, GridSpec, Node};
use crate::models::{
    build_feature_bundle, train_c2w, train_composition, train_context_joint, train_recurrent,
    ws_feature_rows, C2wModel, CompositionModel, ContextEncoder, Method, RecurrentClassifier,
    TrainedComponents,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::text::{
    default_stopwords, normalize_and_tokenize, parse_stopwords, NgramVectorizer, NormalizedText,
    WordVocab,
};

/// Stored in the char-vocab section; a container trained against a
/// different alphabet must not be silently reinterpreted.
const ALPHABET_SIGNATURE: &str = "abcdefghijklmnopqrstuvwxyz0123456789 ";

fn round_f32(values: &mut [f64]) {
    for v in values.iter_mut() {
        *v = *v as f32 as f64;
    }
}

/// Components that methods trained on the same split and seed can share.
/// Only the pieces some requested method needs are populated.
#[derive(Debug, Clone, Default)]
pub struct SharedComponents {
    pub vocab: Option<WordVocab>,
    pub table: Option<EmbeddingTable>,
    pub classifier: Option<RecurrentClassifier>,
    pub vectorizer: Option<NgramVectorizer>,
    /// Composes from character one-hots alone.
    pub composer: Option<CompositionModel>,
    pub encoder: Option<ContextEncoder>,
    /// Composes from context-aware character representations.
    pub context_composer: Option<CompositionModel>,
    pub c2w: Option<C2wModel>,
}

fn doc_tokens(docs: &[NormalizedText]) -> Vec<Vec<String>> {
    docs.iter().map(|d| d.tokens.clone()).collect()
}

/// Trains every component any of `methods` needs. Embeddings are tuned by
/// the recurrent classifier first; composers then target the tuned rows.
pub fn train_shared(
    docs: &[NormalizedText],
    classes: &[usize],
    methods: &[Method],
    config: &RunConfig,
) -> Result<SharedComponents> {
    config.validate()?;
    if docs.is_empty() || docs.len() != classes.len() {
        return Err(Error::input("docs/classes must be nonempty and equal length"));
    }
    let seed = config.seed;
    let mut shared = SharedComponents { vocab: Some(WordVocab::build(docs)?), ..Default::default() };
    let vocab = shared.vocab.as_ref().unwrap();
    let tokens = doc_tokens(docs);

    if methods.iter().any(|m| m.uses_word_embeddings()) {
        let mut rng = rng_from_seed(derive_seed(seed, "embed-init"));
        let mut table = match &config.embeddings {
            Some(path) => EmbeddingTable::load_pretrained(path, vocab, &mut rng)?,
            None => EmbeddingTable::random_init(vocab, config.dim, &mut rng)?,
        };
        let mut rc = config.recurrent.clone();
        rc.seed = derive_seed(seed, "recurrent");
        shared.classifier = Some(train_recurrent(&tokens, classes, &mut table, vocab, &rc)?);
        shared.table = Some(table);
    }
    if methods.iter().any(|m| m.uses_ngrams()) {
        shared.vectorizer = Some(NgramVectorizer::fit(
            docs,
            config.ngram_min,
            config.ngram_max,
            config.ngram_scope,
            config.ngram_min_count,
        )?);
    }
    if methods.iter().any(|m| m.uses_composer() && !m.uses_context()) {
        let table = shared.table.as_ref().unwrap();
        let mut cc = config.composer.clone();
        cc.seed = derive_seed(seed, "composer");
        shared.composer = Some(train_composition(table, vocab, &cc)?);
    }
    if methods.iter().any(|m| m.uses_context()) {
        let table = shared.table.as_ref().unwrap();
        let mut ctx = config.context();
        ctx.composer.seed = derive_seed(seed, "context");
        let (encoder, composer) = train_context_joint(&tokens, table, vocab, &ctx)?;
        shared.encoder = Some(encoder);
        shared.context_composer = Some(composer);
    }
    if methods.iter().any(|m| m.is_char()) {
        let mut cw = config.c2w.clone();
        cw.seed = derive_seed(seed, "c2w");
        shared.c2w = Some(train_c2w(&tokens, classes, &cw)?);
    }
    finalize_shared(&mut shared);
    Ok(shared)
}

/// Rounds every learned parameter through f32, the container precision.
fn finalize_shared(shared: &mut SharedComponents) {
    if let Some(t) = &mut shared.table {
        round_f32(&mut t.rows.data);
    }
    if let Some(c) = &mut shared.classifier {
        for p in c.gru.params_mut() {
            round_f32(p);
        }
        for p in c.output.params_mut() {
            round_f32(p);
        }
    }
    for composer in [&mut shared.composer, &mut shared.context_composer].into_iter().flatten() {
        for p in composer.params_mut() {
            round_f32(p);
        }
    }
    if let Some(e) = &mut shared.encoder {
        for p in e.bilstm.params_mut() {
            round_f32(p);
        }
    }
    if let Some(c) = &mut shared.c2w {
        for p in c.params_mut() {
            round_f32(p);
        }
    }
}

fn finalize_gbdt(gbdt: &mut crate::gbdt::GbdtEnsemble) {
    round_f32(&mut gbdt.priors);
    for round in &mut gbdt.trees {
        for tree in round {
            for node in &mut tree.nodes {
                match node {
                    Node::Leaf(v) => *v = *v as f32 as f64,
                    Node::Split { threshold, .. } => *threshold = *threshold as f32 as f64,
                }
            }
        }
    }
}

/// Picks `method`'s components out of a shared pool (without the GBDT).
pub fn assemble(
    shared: &SharedComponents,
    method: Method,
    n_classes: usize,
) -> Result<TrainedComponents> {
    fn need<T: Clone>(part: &Option<T>, what: &str, method: Method) -> Result<T> {
        part.clone()
            .ok_or_else(|| Error::config(format!("shared components lack the {what} for {method}")))
    }
    let mut c = TrainedComponents {
        method,
        n_classes,
        vocab: need(&shared.vocab, "vocabulary", method)?,
        table: None,
        classifier: None,
        c2w: None,
        vectorizer: None,
        composer: None,
        encoder: None,
        gbdt: None,
    };
    if method.uses_word_embeddings() {
        c.table = Some(need(&shared.table, "embedding table", method)?);
        c.classifier = Some(need(&shared.classifier, "recurrent classifier", method)?);
    }
    if method.uses_ngrams() {
        c.vectorizer = Some(need(&shared.vectorizer, "n-gram vectorizer", method)?);
    }
    if method.uses_context() {
        c.encoder = Some(need(&shared.encoder, "context encoder", method)?);
        c.composer = Some(need(&shared.context_composer, "context composer", method)?);
    } else if method.uses_composer() {
        c.composer = Some(need(&shared.composer, "composition model", method)?);
    }
    if method.is_char() {
        c.c2w = Some(need(&shared.c2w, "character-to-word model", method)?);
    }
    Ok(c)
}

/// The feature vector the GBDT sees for one document under this method.
pub fn gbdt_features(c: &TrainedComponents, text: &NormalizedText) -> Result<Vec<f64>> {
    match c.method {
        Method::CharWs => {
            let c2w = c
                .c2w
                .as_ref()
                .ok_or_else(|| Error::config("char-ws requires a trained character-to-word model"))?;
            let embeds = c2w.intermediate_embeddings(&text.tokens)?;
            Ok(ws_feature_rows(&embeds, c2w.embed_dim()))
        }
        _ => Ok(build_feature_bundle(c.method, text, &c.bundle_parts()?)?.vector),
    }
}

/// Trains the boosted-tree stage over the frozen components, if the method
/// uses one. Feature extraction here matches prediction exactly.
pub fn train_method_gbdt(
    c: &mut TrainedComponents,
    docs: &[NormalizedText],
    classes: &[usize],
    config: &RunConfig,
) -> Result<()> {
    if !c.method.uses_gbdt() {
        return Ok(());
    }
    let features: Vec<Vec<f64>> = docs
        .iter()
        .map(|d| gbdt_features(c, d))
        .collect::<Result<_>>()?;
    let mut gbdt = if config.tune_gbdt {
        let seed = derive_seed(config.seed, "gbdt-grid");
        grid_search_train(&features, classes, &GridSpec::default(), 5, seed)?.0
    } else {
        gbdt_train(&features, classes, &config.gbdt)?
    };
    finalize_gbdt(&mut gbdt);
    c.gbdt = Some(gbdt);
    Ok(())
}

/// A trained method plus everything needed to reproduce its preprocessing.
#[derive(Debug, Clone)]
pub struct TrainedMethod {
    pub config: RunConfig,
    /// Class names; index order is the prediction order.
    pub labels: Vec<String>,
    pub stopwords: BTreeSet<String>,
    pub components: TrainedComponents,
}

pub fn load_run_stopwords(config: &RunConfig) -> Result<BTreeSet<String>> {
    match &config.stopwords {
        Some(path) => Ok(parse_stopwords(&std::fs::read_to_string(path)?)),
        None => Ok(default_stopwords()),
    }
}

/// Trains `config.method` from scratch on raw texts.
pub fn train_method(
    texts: &[&str],
    classes: &[usize],
    labels: &[String],
    config: &RunConfig,
) -> Result<TrainedMethod> {
    if labels.len() < 2 {
        return Err(Error::input("need at least two classes"));
    }
    if texts.len() != classes.len() {
        return Err(Error::input("texts/classes must be equal length"));
    }
    if let Some(&bad) = classes.iter().find(|&&c| c >= labels.len()) {
        return Err(Error::input(format!("class index {bad} outside the label set")));
    }
    let stopwords = load_run_stopwords(config)?;
    let docs: Vec<NormalizedText> = texts
        .iter()
        .map(|t| normalize_and_tokenize(t, &stopwords))
        .collect();
    let shared = train_shared(&docs, classes, &[config.method], config)?;
    let mut components = assemble(&shared, config.method, labels.len())?;
    train_method_gbdt(&mut components, &docs, classes, config)?;
    Ok(TrainedMethod {
        config: config.clone(),
        labels: labels.to_vec(),
        stopwords,
        components,
    })
}

impl TrainedMethod {
    pub fn normalize(&self, text: &str) -> NormalizedText {
        normalize_and_tokenize(text, &self.stopwords)
    }

    /// Class distribution over `labels` for one raw text.
    pub fn predict_text(&self, text: &str) -> Result<Vec<f64>> {
        self.components.predict(&self.normalize(text))
    }

    pub fn predict_class(&self, text: &str) -> Result<usize> {
        self.components.predict_class(&self.normalize(text))
    }

    pub fn to_container(&self) -> Container {
        let mut container = Container::new();
        container.insert("config", self.config.dump().into_bytes());

        let mut w = Writer::new();
        w.put_u32(self.labels.len() as u32);
        for label in &self.labels {
            w.put_str(label);
        }
        container.insert("labels", w.into_inner());

        let stop: Vec<&str> = self.stopwords.iter().map(String::as_str).collect();
        container.insert("stopwords", stop.join("\n").into_bytes());
        container.insert("char-vocab", ALPHABET_SIGNATURE.as_bytes().to_vec());

        let mut w = Writer::new();
        encode_vocab(&mut w, &self.components.vocab);
        container.insert("vocab", w.into_inner());

        if let Some(t) = &self.components.table {
            let mut w = Writer::new();
            encode_table(&mut w, t);
            container.insert("embeddings", w.into_inner());
        }

        let mut w = Writer::new();
        let flag = |x: bool, bit: u8| if x { 1u8 << bit } else { 0 };
        w.put_u8(
            flag(self.components.classifier.is_some(), 0)
                | flag(self.components.c2w.is_some(), 1)
                | flag(self.components.composer.is_some(), 2)
                | flag(self.components.encoder.is_some(), 3),
        );
        if let Some(c) = &self.components.classifier {
            encode_recurrent(&mut w, c);
        }
        if let Some(c) = &self.components.c2w {
            encode_c2w(&mut w, c);
        }
        if let Some(c) = &self.components.composer {
            encode_composer(&mut w, c);
        }
        if let Some(e) = &self.components.encoder {
            encode_bilstm(&mut w, &e.bilstm);
        }
        container.insert("layers", w.into_inner());

        if let Some(v) = &self.components.vectorizer {
            let mut w = Writer::new();
            encode_vectorizer(&mut w, v);
            container.insert("vectorizer", w.into_inner());
        }
        if let Some(g) = &self.components.gbdt {
            let mut w = Writer::new();
            encode_gbdt(&mut w, g);
            container.insert("gbdt", w.into_inner());
        }
        container
    }

    pub fn from_container(container: &Container) -> Result<TrainedMethod> {
        let utf8 = |name: &str| -> Result<String> {
            String::from_utf8(container.section(name)?.to_vec())
                .map_err(|_| Error::container(format!("section '{name}' is not UTF-8")))
        };
        let mut config = RunConfig::new(Method::Hs);
        config
            .apply_text(&utf8("config")?)
            .map_err(|e| Error::container(format!("bad config section: {e}")))?;
        config
            .validate()
            .map_err(|e| Error::container(format!("bad config section: {e}")))?;
        let method = config.method;

        let labels_bytes = container.section("labels")?;
        let mut r = Reader::new(labels_bytes);
        let n_labels = r.u32()? as usize;
        let mut labels = Vec::with_capacity(n_labels);
        for _ in 0..n_labels {
            labels.push(r.string()?);
        }
        r.finish()?;
        if labels.len() < 2 {
            return Err(Error::container("label section lists fewer than two classes"));
        }

        let stopwords = parse_stopwords(&utf8("stopwords")?);
        if utf8("char-vocab")? != ALPHABET_SIGNATURE {
            return Err(Error::container("container built for a different character alphabet"));
        }

        let mut r = Reader::new(container.section("vocab")?);
        let vocab = decode_vocab(&mut r)?;
        r.finish()?;

        let table = match container.maybe_section("embeddings") {
            Some(bytes) => {
                let mut r = Reader::new(bytes);
                let t = decode_table(&mut r)?;
                r.finish()?;
                Some(t)
            }
            None => None,
        };

        let mut r = Reader::new(container.section("layers")?);
        let flags = r.u8()?;
        let classifier = if flags & 1 != 0 { Some(decode_recurrent(&mut r)?) } else { None };
        let c2w = if flags & 2 != 0 { Some(decode_c2w(&mut r)?) } else { None };
        let composer = if flags & 4 != 0 { Some(decode_composer(&mut r)?) } else { None };
        let encoder = if flags & 8 != 0 {
            Some(ContextEncoder { bilstm: decode_bilstm(&mut r)? })
        } else {
            None
        };
        r.finish()?;

        let vectorizer = match container.maybe_section("vectorizer") {
            Some(bytes) => {
                let mut r = Reader::new(bytes);
                let v = decode_vectorizer(&mut r)?;
                r.finish()?;
                Some(v)
            }
            None => None,
        };
        let gbdt = match container.maybe_section("gbdt") {
            Some(bytes) => {
                let mut r = Reader::new(bytes);
                let g = decode_gbdt(&mut r)?;
                r.finish()?;
                Some(g)
            }
            None => None,
        };

        let components = TrainedComponents {
            method,
            n_classes: labels.len(),
            vocab,
            table,
            classifier,
            c2w,
            vectorizer,
            composer,
            encoder,
            gbdt,
        };
        let missing = |what: &str| {
            Err(Error::container(format!("{method} container is missing its {what}")))
        };
        if components.method.uses_word_embeddings()
            && (components.table.is_none() || components.classifier.is_none())
        {
            return missing("embedding table or classifier");
        }
        if components.method.uses_ngrams() && components.vectorizer.is_none() {
            return missing("n-gram vectorizer");
        }
        if components.method.uses_composer() && components.composer.is_none() {
            return missing("composition model");
        }
        if components.method.uses_context() && components.encoder.is_none() {
            return missing("context encoder");
        }
        if components.method.is_char() && components.c2w.is_none() {
            return missing("character-to-word model");
        }
        if components.method.uses_gbdt() && components.gbdt.is_none() {
            return missing("boosted-tree classifier");
        }
        if let Some(g) = &components.gbdt {
            if g.n_classes != labels.len() {
                return Err(Error::container("class count disagrees between sections"));
            }
        }
        Ok(TrainedMethod { config, labels, stopwords, components })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container().save(path)
    }

    pub fn load(path: &Path) -> Result<TrainedMethod> {
        TrainedMethod::from_container(&Container::load(path)?)
    }
}

/// One-shot protocol: stratified train/test split, train on one side,
/// metrics on the other.
pub struct SplitEvaluation {
    pub model: TrainedMethod,
    pub report: MetricsReport,
    pub test_indices: Vec<usize>,
    /// Predicted class per test index, aligned with `test_indices`.
    pub predictions: Vec<usize>,
}

pub fn evaluate_split(
    texts: &[&str],
    classes: &[usize],
    labels: &[String],
    config: &RunConfig,
) -> Result<SplitEvaluation> {
    let (train_idx, test_idx) =
        stratified_split(classes, config.train_fraction, derive_seed(config.seed, "split"))?;
    let train_texts: Vec<&str> = train_idx.iter().map(|&i| texts[i]).collect();
    let train_classes: Vec<usize> = train_idx.iter().map(|&i| classes[i]).collect();
    let model = train_method(&train_texts, &train_classes, labels, config)?;
    let mut predictions = Vec::with_capacity(test_idx.len());
    for &i in &test_idx {
        predictions.push(model.predict_class(texts[i])?);
    }
    let gold: Vec<usize> = test_idx.iter().map(|&i| classes[i]).collect();
    let report = compute_metrics(&gold, &predictions, labels.len())?;
    Ok(SplitEvaluation { model, report, test_indices: test_idx, predictions })
}

/// Stratified k-fold protocol. Fold i trains with master seed
/// `config.seed + i`, so folds are independent and a run is reproducible
/// whether folds execute sequentially or not.
pub fn cross_validate(
    texts: &[&str],
    classes: &[usize],
    labels: &[String],
    config: &RunConfig,
) -> Result<Vec<MetricsReport>> {
    let plan = stratified_kfold(classes, config.folds, derive_seed(config.seed, "cv"))?;
    let mut reports = Vec::with_capacity(config.folds);
    for fold in 0..plan.folds.len() {
        let train_idx = plan.train_indices(fold);
        let test_idx = &plan.folds[fold];
        let train_texts: Vec<&str> = train_idx.iter().map(|&i| texts[i]).collect();
        let train_classes: Vec<usize> = train_idx.iter().map(|&i| classes[i]).collect();
        let mut fold_config = config.clone();
        fold_config.seed = config.seed.wrapping_add(fold as u64);
        let model = train_method(&train_texts, &train_classes, labels, &fold_config)?;
        let mut predictions = Vec::with_capacity(test_idx.len());
        for &i in test_idx {
            predictions.push(model.predict_class(texts[i])?);
        }
        let gold: Vec<usize> = test_idx.iter().map(|&i| classes[i]).collect();
        reports.push(compute_metrics(&gold, &predictions, labels.len())?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marker_corpus() -> (Vec<String>, Vec<usize>, Vec<String>) {
        let class_markers = [
            ["wug", "fep", "daxy"],
            ["blick", "tove", "zorp"],
        ];
        let fillers = ["one", "two", "red", "blue", "door", "lamp", "tree", "rock"];
        let mut texts = Vec::new();
        let mut classes = Vec::new();
        for i in 0..24 {
            let class = i % 2;
            let marker = class_markers[class][i % 3];
            let f1 = fillers[i % fillers.len()];
            let f2 = fillers[(i * 3 + 1) % fillers.len()];
            texts.push(format!("{f1} {marker} {f2}"));
            classes.push(class);
        }
        (texts, classes, vec!["calm".into(), "angry".into()])
    }

    fn small_config(method: Method, seed: u64) -> RunConfig {
        let mut config = RunConfig::new(method);
        config.seed = seed;
        config.dim = 8;
        config.ngram_min = 2;
        config.ngram_max = 3;
        config.recurrent.hidden = 10;
        config.recurrent.layers = 1;
        config.recurrent.max_epochs = 6;
        config.recurrent.dropout = 0.2;
        config.composer.lstm_hidden = 8;
        config.composer.lstm_layers = 1;
        config.composer.hidden_dim = 10;
        config.composer.max_epochs = 3;
        config.encoder_hidden = 6;
        config.c2w.lstm_hidden = 6;
        config.c2w.lstm_layers = 1;
        config.c2w.embed_dim = 8;
        config.c2w.gru_hidden = 8;
        config.c2w.gru_layers = 1;
        config.c2w.max_epochs = 4;
        config.gbdt.rounds = 12;
        config.gbdt.max_depth = 3;
        config.gbdt.min_leaf = 2;
        config
    }

    fn train_small(method: Method, seed: u64) -> (TrainedMethod, Vec<String>, Vec<usize>) {
        let (texts, classes, labels) = marker_corpus();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let config = small_config(method, seed);
        let model = train_method(&refs, &classes, &labels, &config).unwrap();
        (model, texts, classes)
    }

    #[test]
    fn every_method_trains_and_round_trips_through_a_container() {
        for method in crate::models::ALL_METHODS {
            let (model, texts, _) = train_small(method, 400);
            let container = model.to_container();
            let mut bytes = Vec::new();
            container.write_to(&mut bytes).unwrap();
            let back = TrainedMethod::from_container(&Container::read_from(&bytes[..]).unwrap())
                .unwrap();
            for text in texts.iter().take(6) {
                let a = model.predict_text(text).unwrap();
                let b = back.predict_text(text).unwrap();
                assert_eq!(a, b, "{method} drifted through the container");
            }
            let unseen = "bl1ck zzz";
            assert_eq!(
                model.predict_text(unseen).unwrap(),
                back.predict_text(unseen).unwrap(),
                "{method} drifted on unseen words"
            );
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (a, texts, _) = train_small(Method::WsCng, 7);
        let (b, _, _) = train_small(Method::WsCng, 7);
        let probe = &texts[0];
        assert_eq!(a.predict_text(probe).unwrap(), b.predict_text(probe).unwrap());
        // Tree splits on discrete n-gram counts can coincide across seeds,
        // so seed sensitivity is asserted on softmax outputs instead.
        let (c, _, _) = train_small(Method::Hs, 7);
        let (d, _, _) = train_small(Method::Hs, 8);
        assert_ne!(
            c.predict_text(probe).unwrap(),
            d.predict_text(probe).unwrap(),
            "different seeds should not coincide"
        );
    }

    #[test]
    fn shared_components_match_single_method_training() {
        let (texts, classes, labels) = marker_corpus();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let config = small_config(Method::WsCng, 11);
        let stop = load_run_stopwords(&config).unwrap();
        let docs: Vec<NormalizedText> =
            refs.iter().map(|t| normalize_and_tokenize(t, &stop)).collect();

        let shared = train_shared(&docs, &classes, &[Method::Ws, Method::WsCng], &config).unwrap();
        let mut ws_cng = assemble(&shared, Method::WsCng, labels.len()).unwrap();
        train_method_gbdt(&mut ws_cng, &docs, &classes, &config).unwrap();

        let solo = train_method(&refs, &classes, &labels, &config).unwrap();
        for text in docs.iter().take(6) {
            assert_eq!(
                ws_cng.predict(text).unwrap(),
                solo.components.predict(text).unwrap()
            );
        }
    }

    #[test]
    fn corrupted_container_bytes_are_rejected() {
        let (model, _, _) = train_small(Method::Hs, 402);
        let mut bytes = Vec::new();
        model.to_container().write_to(&mut bytes).unwrap();
        let step = (bytes.len() / 40).max(1);
        for i in (0..bytes.len()).step_by(step) {
            let mut copy = bytes.clone();
            copy[i] ^= 0x10;
            match Container::read_from(&copy[..]) {
                Err(_) => {}
                Ok(c) => assert!(
                    TrainedMethod::from_container(&c).is_err(),
                    "flipping byte {i} went unnoticed"
                ),
            }
        }
    }

    #[test]
    fn split_evaluation_reports_test_side_metrics() {
        let (texts, classes, labels) = marker_corpus();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let config = small_config(Method::Hs, 403);
        let eval = evaluate_split(&refs, &classes, &labels, &config).unwrap();
        assert_eq!(eval.test_indices.len(), eval.predictions.len());
        let expected_test = texts.len() - (texts.len() as f64 * config.train_fraction).round() as usize;
        assert_eq!(eval.test_indices.len(), expected_test);
        assert_eq!(eval.report.per_class.len(), labels.len());
        // Markers decide the class, so a trained model should beat chance.
        assert!(eval.report.macro_f1 > 0.5, "macro F1 {}", eval.report.macro_f1);
    }

    #[test]
    fn cross_validation_is_reproducible_and_fold_seeded() {
        let (texts, classes, labels) = marker_corpus();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let mut config = small_config(Method::Hs, 404);
        config.folds = 3;
        config.recurrent.max_epochs = 3;
        let a = cross_validate(&refs, &classes, &labels, &config).unwrap();
        let b = cross_validate(&refs, &classes, &labels, &config).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn train_rejects_inconsistent_inputs() {
        let (texts, classes, labels) = marker_corpus();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let config = small_config(Method::Hs, 405);
        assert!(train_method(&refs, &classes[..4], &labels, &config).is_err());
        assert!(train_method(&refs, &classes, &labels[..1], &config).is_err());
        let mut bad = classes.clone();
        bad[0] = 9;
        assert!(train_method(&refs, &bad, &labels, &config).is_err());
    }
}
