//! Character-level composition of word embeddings.
//!
//! A sequence encoder (two-layer bi-LSTM or multi-width CNN with max pooling)
//! reads the word's characters, a tanh hidden layer follows, and a linear
//! output layer emits a vector in embedding space. Training minimizes mean
//! squared error against task-tuned embedding rows, with each word presented
//! as many times per epoch as it occurs in the corpus.

use rand::seq::SliceRandom;

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::nn::dropout::dropout_mask;
use crate::nn::loss::{mse, mse_backward};
use crate::nn::{Adam, BiLstm, ConvMaxPool, Dense};
use crate::nn::lstm::BiLstmTape;
use crate::nn::conv::ConvTape;
use crate::rng::{derive_seed, rng_from_seed, ChaCha8Rng};
use crate::text::{encode_token, one_hot_sequence, WordVocab, CHAR_DIM};

use super::recurrent::{EarlyStopper, StopDecision};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComposerVariant {
    BiLstm,
    Cnn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposerConfig {
    pub variant: ComposerVariant,
    pub lstm_hidden: usize,
    pub lstm_layers: usize,
    pub conv_widths: Vec<usize>,
    pub conv_filters: usize,
    pub hidden_dim: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub holdout_fraction: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for ComposerConfig {
    fn default() -> Self {
        ComposerConfig {
            variant: ComposerVariant::BiLstm,
            lstm_hidden: 256,
            lstm_layers: 2,
            conv_widths: vec![1, 2, 3, 4],
            conv_filters: 64,
            hidden_dim: 256,
            dropout: 0.5,
            learning_rate: 1e-3,
            holdout_fraction: 0.1,
            max_epochs: 50,
            patience: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SequenceEncoder {
    BiLstm(BiLstm),
    Cnn(ConvMaxPool),
}

pub enum SequenceTape {
    BiLstm(BiLstmTape),
    Cnn(ConvTape),
}

#[derive(Debug, Clone)]
pub struct CompositionModel {
    pub encoder: SequenceEncoder,
    pub hidden: Dense,
    pub output: Dense,
    pub input_dim: usize,
    pub dropout: f64,
}

pub struct ComposeTape {
    seq: SequenceTape,
    feat: Vec<f64>,
    /// Post-tanh activations before dropout.
    act: Vec<f64>,
    /// Inverted dropout mask applied to `act`, when training.
    mask: Option<Vec<f64>>,
    len: usize,
    pub out: Vec<f64>,
}

impl CompositionModel {
    pub fn new(input_dim: usize, output_dim: usize, config: &ComposerConfig) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || config.hidden_dim == 0 {
            return Err(Error::config("composer dimensions must be positive"));
        }
        let mut rng = rng_from_seed(derive_seed(config.seed, "composer-init"));
        let (encoder, feat_dim) = match config.variant {
            ComposerVariant::BiLstm => {
                if config.lstm_hidden == 0 || config.lstm_layers == 0 {
                    return Err(Error::config("composer LSTM shape must be positive"));
                }
                let net = BiLstm::glorot(input_dim, config.lstm_hidden, config.lstm_layers, &mut rng);
                let dim = 2 * config.lstm_hidden;
                (SequenceEncoder::BiLstm(net), dim)
            }
            ComposerVariant::Cnn => {
                if config.conv_widths.is_empty() || config.conv_filters == 0 {
                    return Err(Error::config("composer CNN shape must be positive"));
                }
                let net = ConvMaxPool::glorot(
                    input_dim,
                    &config.conv_widths,
                    config.conv_filters,
                    &mut rng,
                );
                let dim = net.output_dim();
                (SequenceEncoder::Cnn(net), dim)
            }
        };
        Ok(CompositionModel {
            encoder,
            hidden: Dense::glorot(feat_dim, config.hidden_dim, &mut rng),
            output: Dense::glorot(config.hidden_dim, output_dim, &mut rng),
            input_dim,
            dropout: config.dropout,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.output.w.rows
    }

    /// Forward pass over already-vectorized inputs (one-hot characters or
    /// context representations). `dropout_rng` enables training mode.
    pub fn forward_inputs(
        &self,
        inputs: &[Vec<f64>],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<ComposeTape> {
        if inputs.is_empty() {
            return Err(Error::input("composition over an empty sequence"));
        }
        if inputs[0].len() != self.input_dim {
            return Err(Error::input(format!(
                "composer expects input dim {}, got {}",
                self.input_dim,
                inputs[0].len()
            )));
        }
        let (seq, feat) = match &self.encoder {
            SequenceEncoder::BiLstm(net) => {
                let tape = net.forward(inputs)?;
                let mut feat = tape.fwd_outputs.last().unwrap().clone();
                feat.extend_from_slice(&tape.bwd_outputs[0]);
                (SequenceTape::BiLstm(tape), feat)
            }
            SequenceEncoder::Cnn(net) => {
                let tape = net.forward(inputs)?;
                let feat = tape.output.clone();
                (SequenceTape::Cnn(tape), feat)
            }
        };
        let pre = self.hidden.forward(&feat);
        let act: Vec<f64> = pre.iter().map(|v| v.tanh()).collect();
        let (dropped, mask) = match dropout_rng {
            Some(rng) if self.dropout > 0.0 => {
                let mask = dropout_mask(act.len(), self.dropout, rng)?;
                let dropped: Vec<f64> =
                    act.iter().zip(mask.iter()).map(|(a, m)| a * m).collect();
                (dropped, Some(mask))
            }
            _ => (act.clone(), None),
        };
        let out = self.output.forward(&dropped);
        Ok(ComposeTape { seq, feat, act, mask, len: inputs.len(), out })
    }

    /// Accumulates parameter gradients for dL/d(out) and returns dL/d(input t).
    pub fn backward(
        &self,
        tape: &ComposeTape,
        d_out: &[f64],
        grad: &mut CompositionModel,
    ) -> Vec<Vec<f64>> {
        let dropped: Vec<f64> = match &tape.mask {
            Some(mask) => tape.act.iter().zip(mask.iter()).map(|(a, m)| a * m).collect(),
            None => tape.act.clone(),
        };
        let d_dropped = self.output.backward(&dropped, d_out, &mut grad.output);
        let d_act: Vec<f64> = match &tape.mask {
            Some(mask) => d_dropped.iter().zip(mask.iter()).map(|(d, m)| d * m).collect(),
            None => d_dropped,
        };
        let d_pre: Vec<f64> =
            d_act.iter().zip(tape.act.iter()).map(|(d, a)| d * (1.0 - a * a)).collect();
        let d_feat = self.hidden.backward(&tape.feat, &d_pre, &mut grad.hidden);
        match (&self.encoder, &tape.seq, &mut grad.encoder) {
            (
                SequenceEncoder::BiLstm(net),
                SequenceTape::BiLstm(seq_tape),
                SequenceEncoder::BiLstm(net_grad),
            ) => {
                let hidden = net.hidden_dim();
                let mut d_fwd: Vec<Vec<f64>> = vec![Vec::new(); tape.len];
                let mut d_bwd: Vec<Vec<f64>> = vec![Vec::new(); tape.len];
                *d_fwd.last_mut().unwrap() = d_feat[..hidden].to_vec();
                d_bwd[0] = d_feat[hidden..].to_vec();
                net.backward(seq_tape, &d_fwd, &d_bwd, net_grad)
            }
            (
                SequenceEncoder::Cnn(net),
                SequenceTape::Cnn(seq_tape),
                SequenceEncoder::Cnn(net_grad),
            ) => net.backward(seq_tape, &d_feat, net_grad),
            _ => unreachable!("encoder/tape variant mismatch"),
        }
    }

    /// Composes an embedding for a word in isolation from its characters.
    pub fn compose_word(&self, word: &str) -> Result<Vec<f64>> {
        if word.is_empty() {
            return Err(Error::input("cannot compose an empty word"));
        }
        let seq = encode_token(word);
        let inputs = one_hot_sequence(&seq.indices);
        Ok(self.forward_inputs(&inputs, None)?.out)
    }

    pub fn zeros_like(&self) -> CompositionModel {
        CompositionModel {
            encoder: match &self.encoder {
                SequenceEncoder::BiLstm(net) => SequenceEncoder::BiLstm(net.zeros_like()),
                SequenceEncoder::Cnn(net) => SequenceEncoder::Cnn(net.zeros_like()),
            },
            hidden: Dense::zeros(self.hidden.w.cols, self.hidden.w.rows),
            output: Dense::zeros(self.output.w.cols, self.output.w.rows),
            input_dim: self.input_dim,
            dropout: self.dropout,
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut p = match &self.encoder {
            SequenceEncoder::BiLstm(net) => net.params(),
            SequenceEncoder::Cnn(net) => net.params(),
        };
        p.extend(self.hidden.params());
        p.extend(self.output.params());
        p
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut p = match &mut self.encoder {
            SequenceEncoder::BiLstm(net) => net.params_mut(),
            SequenceEncoder::Cnn(net) => net.params_mut(),
        };
        p.extend(self.hidden.params_mut());
        p.extend(self.output.params_mut());
        p
    }

    pub(crate) fn zero_grads(grad: &mut CompositionModel) {
        for p in grad.params_mut() {
            p.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Word types held out from the training stream for loss monitoring.
pub(crate) fn holdout_word_split(
    n_words: usize,
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n_words).collect();
    let mut rng = rng_from_seed(seed);
    order.shuffle(&mut rng);
    let mut held = ((fraction * n_words as f64).round() as usize).max(1);
    if held >= n_words {
        held = n_words - 1;
    }
    let val: Vec<usize> = order[..held].to_vec();
    let train: Vec<usize> = order[held..].to_vec();
    (train, val)
}

/// Training stream: each word index repeated once per corpus occurrence.
pub(crate) fn frequency_stream(vocab: &WordVocab, word_indices: &[usize]) -> Vec<usize> {
    let mut stream = Vec::new();
    for &wi in word_indices {
        let freq = vocab.frequency(wi).max(1) as usize;
        stream.extend(std::iter::repeat(wi).take(freq));
    }
    stream
}

/// Trains a composition model against the tuned rows of `table`. The training
/// stream lists each word once per corpus occurrence, reshuffled every epoch.
pub fn train_composition(
    table: &EmbeddingTable,
    vocab: &WordVocab,
    config: &ComposerConfig,
) -> Result<CompositionModel> {
    if vocab.word_count() < 10 {
        return Err(Error::input(format!(
            "composition needs at least 10 vocabulary words, got {}",
            vocab.word_count()
        )));
    }
    let mut model = CompositionModel::new(CHAR_DIM, table.dim, config)?;
    let inputs: Vec<Vec<Vec<f64>>> = vocab
        .words()
        .iter()
        .map(|w| one_hot_sequence(&encode_token(w).indices))
        .collect();

    let (train_words, val_words) = holdout_word_split(
        vocab.word_count(),
        config.holdout_fraction,
        derive_seed(config.seed, "composer-holdout"),
    );
    let mut stream = frequency_stream(vocab, &train_words);

    let mut epoch_rng = rng_from_seed(derive_seed(config.seed, "composer-epochs"));
    let mut opt = Adam::new(config.learning_rate);
    let mut grad = model.zeros_like();
    let mut stopper = EarlyStopper::new(config.patience.max(1));
    let mut best: Option<CompositionModel> = None;
    for _epoch in 0..config.max_epochs {
        stream.shuffle(&mut epoch_rng);
        for &wi in &stream {
            let target = table.row(wi);
            let tape = model.forward_inputs(&inputs[wi], Some(&mut epoch_rng))?;
            let loss = mse(&tape.out, target)?;
            if !loss.is_finite() {
                return Err(Error::Training("non-finite composition loss".into()));
            }
            let d_out = mse_backward(&tape.out, target);
            model.backward(&tape, &d_out, &mut grad);
            {
                let mut params = model.params_mut();
                let grads = grad.params();
                opt.step(&mut params, &grads)?;
            }
            CompositionModel::zero_grads(&mut grad);
        }

        let mut total = 0.0;
        for &wi in &val_words {
            let tape = model.forward_inputs(&inputs[wi], None)?;
            total += mse(&tape.out, table.row(wi))?;
        }
        let val_loss = total / val_words.len() as f64;
        if !val_loss.is_finite() {
            return Err(Error::Training("non-finite composition validation loss".into()));
        }
        match stopper.observe(val_loss) {
            StopDecision::Improved => best = Some(model.clone()),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }
    Ok(best.unwrap_or(model))
}
