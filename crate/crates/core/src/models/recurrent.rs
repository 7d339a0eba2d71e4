//! Recurrent document classifier: embeddings, stacked GRU, softmax layer.
//!
//! Training updates the embedding table together with the network and flips
//! each updated row's provenance to task-tuned. Early stopping watches the
//! loss on a stratified validation hold-out and restores the best snapshot.

use rand::seq::SliceRandom;

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::stratified_split;
use crate::nn::loss::{cross_entropy, softmax, softmax_cross_entropy_backward};
use crate::nn::matrix::Matrix;
use crate::nn::{Adam, Dense, Gru};
use crate::rng::{derive_seed, rng_from_seed, ChaCha8Rng};
use crate::text::WordVocab;

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentConfig {
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub val_fraction: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for RecurrentConfig {
    fn default() -> Self {
        RecurrentConfig {
            hidden: 128,
            layers: 2,
            dropout: 0.5,
            learning_rate: 1e-3,
            val_fraction: 0.1,
            max_epochs: 50,
            patience: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecurrentClassifier {
    pub gru: Gru,
    pub output: Dense,
    pub dropout: f64,
    pub n_classes: usize,
}

impl RecurrentClassifier {
    pub fn hidden_dim(&self) -> usize {
        self.gru.hidden_dim()
    }

    /// Final hidden state h_n over the embedded rows (evaluation mode).
    pub fn hidden_state(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let tape = self.gru.forward(rows, None)?;
        Ok(tape.outputs.last().cloned().unwrap())
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let h = self.hidden_state(rows)?;
        Ok(softmax(&self.output.forward(&h)))
    }

    /// Class distribution for a tokenized text; an empty token list is read
    /// as a single OOV token.
    pub fn predict(
        &self,
        tokens: &[String],
        table: &EmbeddingTable,
        vocab: &WordVocab,
    ) -> Result<Vec<f64>> {
        self.predict_rows(&embed_tokens(tokens, table, vocab))
    }
}

/// Embedded rows for a document; empty documents become one OOV row.
pub fn embed_tokens(
    tokens: &[String],
    table: &EmbeddingTable,
    vocab: &WordVocab,
) -> Vec<Vec<f64>> {
    token_indices(tokens, vocab)
        .into_iter()
        .map(|i| table.row(i).to_vec())
        .collect()
}

/// Vocabulary indices for a document; empty documents become `[oov]`.
pub fn token_indices(tokens: &[String], vocab: &WordVocab) -> Vec<usize> {
    if tokens.is_empty() {
        vec![vocab.oov_index()]
    } else {
        tokens.iter().map(|t| vocab.encode(t)).collect()
    }
}

/// Validation decision helper shared by the trainers.
pub(crate) struct EarlyStopper {
    best: f64,
    patience: usize,
    strikes: usize,
}

pub(crate) enum StopDecision {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper { best: f64::INFINITY, patience, strikes: 0 }
    }

    pub fn observe(&mut self, loss: f64) -> StopDecision {
        if loss < self.best {
            self.best = loss;
            self.strikes = 0;
            StopDecision::Improved
        } else {
            self.strikes += 1;
            if self.strikes >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }
}

/// Splits off a validation set; degenerates to "monitor training loss" when
/// the dataset is too small to spare a stratified hold-out.
pub(crate) fn validation_split(
    labels: &[usize],
    val_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let n = labels.len();
    if val_fraction > 0.0 && (val_fraction * n as f64) >= 1.0 {
        if let Ok((train, val)) = stratified_split(labels, 1.0 - val_fraction, seed) {
            if !val.is_empty() && !train.is_empty() {
                return (train, val);
            }
        }
    }
    ((0..n).collect(), Vec::new())
}

pub fn train_recurrent(
    docs: &[Vec<String>],
    labels: &[usize],
    table: &mut EmbeddingTable,
    vocab: &WordVocab,
    config: &RecurrentConfig,
) -> Result<RecurrentClassifier> {
    if docs.is_empty() || docs.len() != labels.len() {
        return Err(Error::input("docs/labels must be nonempty and equal length"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    if labels.iter().collect::<std::collections::BTreeSet<_>>().len() < 2 {
        return Err(Error::input("single-class dataset"));
    }
    if config.layers == 0 || config.hidden == 0 {
        return Err(Error::config("hidden size and layer count must be positive"));
    }
    let mut init_rng = rng_from_seed(derive_seed(config.seed, "recurrent-init"));
    let mut classifier = RecurrentClassifier {
        gru: Gru::glorot(table.dim, config.hidden, config.layers, &mut init_rng),
        output: Dense::glorot(config.hidden, n_classes, &mut init_rng),
        dropout: config.dropout,
        n_classes,
    };

    let (train_idx, val_idx) =
        validation_split(labels, config.val_fraction, derive_seed(config.seed, "recurrent-val"));
    let mut order: Vec<usize> = train_idx.clone();
    let mut epoch_rng = rng_from_seed(derive_seed(config.seed, "recurrent-epochs"));
    let mut opt = Adam::new(config.learning_rate);
    let mut gru_grad = classifier.gru.zeros_like();
    let mut out_grad = Dense::zeros(config.hidden, n_classes);
    let mut table_grad = Matrix::zeros(table.rows.rows, table.dim);
    let mut touched = vec![false; table.rows.rows];
    let doc_indices: Vec<Vec<usize>> = docs.iter().map(|d| token_indices(d, vocab)).collect();

    let mut stopper = EarlyStopper::new(config.patience.max(1));
    let mut best: Option<(Gru, Dense, Matrix, Vec<bool>)> = None;
    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut epoch_rng);
        for &di in &order {
            let indices = &doc_indices[di];
            let rows: Vec<Vec<f64>> = indices.iter().map(|&i| table.row(i).to_vec()).collect();
            let dropout_arg = if classifier.dropout > 0.0 {
                Some((classifier.dropout, &mut epoch_rng))
            } else {
                None
            };
            let tape = classifier.gru.forward(&rows, dropout_arg)?;
            let h_n = tape.outputs.last().unwrap();
            let probs = softmax(&classifier.output.forward(h_n));
            let loss = cross_entropy(&probs, labels[di])?;
            if !loss.is_finite() {
                return Err(Error::Training("non-finite training loss".into()));
            }
            let d_logits = softmax_cross_entropy_backward(&probs, labels[di]);
            let d_hn = classifier.output.backward(h_n, &d_logits, &mut out_grad);
            let mut d_outputs: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
            *d_outputs.last_mut().unwrap() = d_hn;
            let d_rows = classifier.gru.backward(&tape, &d_outputs, &mut gru_grad);
            for (t, &wi) in indices.iter().enumerate() {
                let grad_row = table_grad.row_mut(wi);
                for (g, d) in grad_row.iter_mut().zip(d_rows[t].iter()) {
                    *g += d;
                }
                touched[wi] = true;
            }

            {
                let mut params: Vec<&mut [f64]> = classifier.gru.params_mut();
                params.extend(classifier.output.params_mut());
                params.push(&mut table.rows.data);
                let mut grads: Vec<&[f64]> = gru_grad.params();
                grads.extend(out_grad.params());
                grads.push(&table_grad.data);
                opt.step(&mut params, &grads)?;
            }
            for cell in &mut gru_grad.layers {
                for p in cell.params_mut() {
                    p.iter_mut().for_each(|v| *v = 0.0);
                }
            }
            for p in out_grad.params_mut() {
                p.iter_mut().for_each(|v| *v = 0.0);
            }
            for &wi in indices {
                table_grad.row_mut(wi).iter_mut().for_each(|v| *v = 0.0);
            }
        }

        let monitor_idx = if val_idx.is_empty() { &train_idx } else { &val_idx };
        let mut total = 0.0;
        for &di in monitor_idx {
            let rows: Vec<Vec<f64>> =
                doc_indices[di].iter().map(|&i| table.row(i).to_vec()).collect();
            let probs = classifier.predict_rows(&rows)?;
            total += cross_entropy(&probs, labels[di])?;
        }
        let monitor_loss = total / monitor_idx.len() as f64;
        if !monitor_loss.is_finite() {
            return Err(Error::Training("non-finite validation loss".into()));
        }
        match stopper.observe(monitor_loss) {
            StopDecision::Improved => {
                best = Some((
                    classifier.gru.clone(),
                    classifier.output.clone(),
                    table.rows.clone(),
                    touched.clone(),
                ));
            }
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }
    if let Some((gru, output, rows, best_touched)) = best {
        classifier.gru = gru;
        classifier.output = output;
        table.rows = rows;
        touched = best_touched;
    }
    for (i, was_touched) in touched.iter().enumerate() {
        if *was_touched {
            table.mark_tuned(i);
        }
    }
    Ok(classifier)
}

/// L2-normalized sum of the document's embedding rows; empty text gives the
/// zero vector.
pub fn ws_feature(tokens: &[String], table: &EmbeddingTable, vocab: &WordVocab) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim];
    for tok in tokens {
        for (s, v) in sum.iter_mut().zip(table.lookup(tok, vocab).iter()) {
            *s += v;
        }
    }
    crate::nn::matrix::l2_normalize(&mut sum);
    sum
}

/// The same normalized sum over prebuilt rows (used when composed embeddings
/// substitute for unseen words).
pub fn ws_feature_rows(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row.iter()) {
            *s += v;
        }
    }
    crate::nn::matrix::l2_normalize(&mut sum);
    sum
}

/// Synthetic shortcut used in tests: draws a shuffled label sequence with
/// roughly balanced classes.
pub fn balanced_labels(n: usize, n_classes: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    labels.shuffle(rng);
    labels
}
