//! Character-to-word document classification.
//!
//! Each token's characters pass through a shared two-layer bi-LSTM; the last
//! forward and first backward states, concatenated and linearly projected,
//! form one intermediate word embedding per token. A two-layer GRU with a
//! softmax layer classifies the embedding sequence, and the whole stack
//! trains end-to-end through that output. The intermediate embeddings can
//! also be exported as document features.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::nn::gru::GruTape;
use crate::nn::loss::{cross_entropy, softmax, softmax_cross_entropy_backward};
use crate::nn::lstm::BiLstmTape;
use crate::nn::{Adam, BiLstm, Dense, Gru};
use crate::rng::{derive_seed, rng_from_seed, ChaCha8Rng};
use crate::text::{encode_token, one_hot_sequence, CHAR_DIM, UNKNOWN_CHAR};

use super::recurrent::{validation_split, EarlyStopper, StopDecision};

#[derive(Debug, Clone, PartialEq)]
pub struct C2wConfig {
    pub lstm_hidden: usize,
    pub lstm_layers: usize,
    /// Intermediate word embedding dimension.
    pub embed_dim: usize,
    pub gru_hidden: usize,
    pub gru_layers: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub val_fraction: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for C2wConfig {
    fn default() -> Self {
        C2wConfig {
            lstm_hidden: 128,
            lstm_layers: 2,
            embed_dim: 128,
            gru_hidden: 128,
            gru_layers: 2,
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
pub struct C2wModel {
    pub word_encoder: BiLstm,
    pub word_proj: Dense,
    pub gru: Gru,
    pub output: Dense,
    pub dropout: f64,
    pub n_classes: usize,
}

struct DocTape {
    word_tapes: Vec<BiLstmTape>,
    feats: Vec<Vec<f64>>,
    embeds: Vec<Vec<f64>>,
    gru_tape: GruTape,
    probs: Vec<f64>,
}

/// Character index sequences per token; empty documents and empty tokens
/// degrade to a single unknown character.
fn doc_char_sequences(tokens: &[String]) -> Vec<Vec<usize>> {
    if tokens.is_empty() {
        return vec![vec![UNKNOWN_CHAR]];
    }
    tokens
        .iter()
        .map(|t| {
            let ix = encode_token(t).indices;
            if ix.is_empty() {
                vec![UNKNOWN_CHAR]
            } else {
                ix
            }
        })
        .collect()
}

impl C2wModel {
    pub fn new(n_classes: usize, config: &C2wConfig) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::config("need at least 2 classes"));
        }
        if config.lstm_hidden == 0
            || config.lstm_layers == 0
            || config.embed_dim == 0
            || config.gru_hidden == 0
            || config.gru_layers == 0
        {
            return Err(Error::config("all layer sizes must be positive"));
        }
        let mut rng = rng_from_seed(derive_seed(config.seed, "c2w-init"));
        Ok(C2wModel {
            word_encoder: BiLstm::glorot(CHAR_DIM, config.lstm_hidden, config.lstm_layers, &mut rng),
            word_proj: Dense::glorot(2 * config.lstm_hidden, config.embed_dim, &mut rng),
            gru: Gru::glorot(config.embed_dim, config.gru_hidden, config.gru_layers, &mut rng),
            output: Dense::glorot(config.gru_hidden, n_classes, &mut rng),
            dropout: config.dropout,
            n_classes,
        })
    }

    pub fn embed_dim(&self) -> usize {
        self.word_proj.w.rows
    }

    fn word_forward(&self, char_indices: &[usize]) -> Result<(BiLstmTape, Vec<f64>, Vec<f64>)> {
        let inputs = one_hot_sequence(char_indices);
        let tape = self.word_encoder.forward(&inputs)?;
        let mut feat = tape.fwd_outputs.last().unwrap().clone();
        feat.extend_from_slice(&tape.bwd_outputs[0]);
        let embed = self.word_proj.forward(&feat);
        Ok((tape, feat, embed))
    }

    /// One intermediate embedding per token (empty document: one pseudo-token).
    pub fn intermediate_embeddings(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>> {
        doc_char_sequences(tokens)
            .iter()
            .map(|ix| self.word_forward(ix).map(|(_, _, e)| e))
            .collect()
    }

    fn doc_forward(
        &self,
        char_seqs: &[Vec<usize>],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<DocTape> {
        let mut word_tapes = Vec::with_capacity(char_seqs.len());
        let mut feats = Vec::with_capacity(char_seqs.len());
        let mut embeds = Vec::with_capacity(char_seqs.len());
        for ix in char_seqs {
            let (tape, feat, embed) = self.word_forward(ix)?;
            word_tapes.push(tape);
            feats.push(feat);
            embeds.push(embed);
        }
        let dropout_arg = match dropout_rng {
            Some(rng) if self.dropout > 0.0 => Some((self.dropout, rng)),
            _ => None,
        };
        let gru_tape = self.gru.forward(&embeds, dropout_arg)?;
        let probs = softmax(&self.output.forward(gru_tape.outputs.last().unwrap()));
        Ok(DocTape { word_tapes, feats, embeds, gru_tape, probs })
    }

    pub fn predict(&self, tokens: &[String]) -> Result<Vec<f64>> {
        Ok(self.doc_forward(&doc_char_sequences(tokens), None)?.probs)
    }

    fn doc_backward(&self, tape: &DocTape, label: usize, grad: &mut C2wModel) {
        let d_logits = softmax_cross_entropy_backward(&tape.probs, label);
        let h_n = tape.gru_tape.outputs.last().unwrap();
        let d_hn = self.output.backward(h_n, &d_logits, &mut grad.output);
        let mut d_outputs: Vec<Vec<f64>> = vec![Vec::new(); tape.embeds.len()];
        *d_outputs.last_mut().unwrap() = d_hn;
        let d_embeds = self.gru.backward(&tape.gru_tape, &d_outputs, &mut grad.gru);
        let hidden = self.word_encoder.hidden_dim();
        for (t, d_embed) in d_embeds.iter().enumerate() {
            let d_feat =
                self.word_proj.backward(&tape.feats[t], d_embed, &mut grad.word_proj);
            let len = tape.word_tapes[t].fwd_outputs.len();
            let mut d_fwd: Vec<Vec<f64>> = vec![Vec::new(); len];
            let mut d_bwd: Vec<Vec<f64>> = vec![Vec::new(); len];
            *d_fwd.last_mut().unwrap() = d_feat[..hidden].to_vec();
            d_bwd[0] = d_feat[hidden..].to_vec();
            self.word_encoder.backward(
                &tape.word_tapes[t],
                &d_fwd,
                &d_bwd,
                &mut grad.word_encoder,
            );
        }
    }

    pub fn zeros_like(&self) -> C2wModel {
        C2wModel {
            word_encoder: self.word_encoder.zeros_like(),
            word_proj: Dense::zeros(self.word_proj.w.cols, self.word_proj.w.rows),
            gru: self.gru.zeros_like(),
            output: Dense::zeros(self.output.w.cols, self.output.w.rows),
            dropout: self.dropout,
            n_classes: self.n_classes,
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut p = self.word_encoder.params();
        p.extend(self.word_proj.params());
        p.extend(self.gru.params());
        p.extend(self.output.params());
        p
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut p = self.word_encoder.params_mut();
        p.extend(self.word_proj.params_mut());
        p.extend(self.gru.params_mut());
        p.extend(self.output.params_mut());
        p
    }
}

pub fn train_c2w(
    docs: &[Vec<String>],
    labels: &[usize],
    config: &C2wConfig,
) -> Result<C2wModel> {
    if docs.is_empty() || docs.len() != labels.len() {
        return Err(Error::input("docs/labels must be nonempty and equal length"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    if labels.iter().collect::<std::collections::BTreeSet<_>>().len() < 2 {
        return Err(Error::input("single-class dataset"));
    }
    let mut model = C2wModel::new(n_classes, config)?;
    let char_seqs: Vec<Vec<Vec<usize>>> =
        docs.iter().map(|d| doc_char_sequences(d)).collect();

    let (train_idx, val_idx) =
        validation_split(labels, config.val_fraction, derive_seed(config.seed, "c2w-val"));
    let mut order = train_idx.clone();
    let mut epoch_rng = rng_from_seed(derive_seed(config.seed, "c2w-epochs"));
    let mut opt = Adam::new(config.learning_rate);
    let mut grad = model.zeros_like();
    let mut stopper = EarlyStopper::new(config.patience.max(1));
    let mut best: Option<C2wModel> = None;

    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut epoch_rng);
        for &di in &order {
            let tape = model.doc_forward(&char_seqs[di], Some(&mut epoch_rng))?;
            let loss = cross_entropy(&tape.probs, labels[di])?;
            if !loss.is_finite() {
                return Err(Error::Training("non-finite training loss".into()));
            }
            model.doc_backward(&tape, labels[di], &mut grad);
            {
                let mut params = model.params_mut();
                let grads = grad.params();
                opt.step(&mut params, &grads)?;
            }
            for p in grad.params_mut() {
                p.iter_mut().for_each(|v| *v = 0.0);
            }
        }

        let monitor = if val_idx.is_empty() { &train_idx } else { &val_idx };
        let mut total = 0.0;
        for &di in monitor {
            let tape = model.doc_forward(&char_seqs[di], None)?;
            total += cross_entropy(&tape.probs, labels[di])?;
        }
        let monitor_loss = total / monitor.len() as f64;
        if !monitor_loss.is_finite() {
            return Err(Error::Training("non-finite validation loss".into()));
        }
        match stopper.observe(monitor_loss) {
            StopDecision::Improved => best = Some(model.clone()),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }
    Ok(best.unwrap_or(model))
}
