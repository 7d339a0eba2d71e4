//! Context-aware character representations.
//!
//! A bi-directional LSTM reads the whole text's character sequence; each
//! position's representation is the average of the forward and backward
//! states there. The composition model then consumes these representations
//! (instead of one-hot characters) for the span of the target word, so the
//! same surface form can compose differently in different texts.

use rand::seq::SliceRandom;

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::nn::loss::{mse, mse_backward};
use crate::nn::lstm::BiLstmTape;
use crate::nn::{Adam, BiLstm};
use crate::rng::{derive_seed, rng_from_seed};
use crate::text::{encode_text, one_hot_sequence, CharSequence, WordVocab, CHAR_DIM};

use super::compose::{holdout_word_split, ComposerConfig, CompositionModel};
use super::recurrent::{EarlyStopper, StopDecision};

#[derive(Debug, Clone, PartialEq)]
pub struct ContextConfig {
    pub encoder_hidden: usize,
    pub encoder_layers: usize,
    /// Composer shape and the shared training schedule (learning rate,
    /// epochs, patience, seed). Its holdout fraction applies to texts here.
    pub composer: ComposerConfig,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            encoder_hidden: 64,
            encoder_layers: 1,
            composer: ComposerConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContextEncoder {
    pub bilstm: BiLstm,
}

pub struct EncoderTape {
    tape: BiLstmTape,
    pub reps: Vec<Vec<f64>>,
}

impl ContextEncoder {
    pub fn new(config: &ContextConfig) -> Result<Self> {
        if config.encoder_hidden == 0 || config.encoder_layers == 0 {
            return Err(Error::config("encoder shape must be positive"));
        }
        let mut rng = rng_from_seed(derive_seed(config.composer.seed, "context-encoder-init"));
        Ok(ContextEncoder {
            bilstm: BiLstm::glorot(CHAR_DIM, config.encoder_hidden, config.encoder_layers, &mut rng),
        })
    }

    pub fn rep_dim(&self) -> usize {
        self.bilstm.hidden_dim()
    }

    /// Per-position representations over a character index sequence.
    pub fn encode(&self, char_indices: &[usize]) -> Result<EncoderTape> {
        let inputs = one_hot_sequence(char_indices);
        let tape = self.bilstm.forward(&inputs)?;
        let reps: Vec<Vec<f64>> = tape
            .fwd_outputs
            .iter()
            .zip(tape.bwd_outputs.iter())
            .map(|(f, b)| f.iter().zip(b.iter()).map(|(x, y)| 0.5 * (x + y)).collect())
            .collect();
        Ok(EncoderTape { tape, reps })
    }

    /// Accumulates gradients for dL/d(rep t); empty vectors mean zero.
    pub fn backward(&self, tape: &EncoderTape, d_reps: &[Vec<f64>], grad: &mut BiLstm) {
        let halved: Vec<Vec<f64>> = d_reps
            .iter()
            .map(|d| d.iter().map(|v| 0.5 * v).collect())
            .collect();
        self.bilstm.backward(&tape.tape, &halved, &halved, grad);
    }
}

/// A text encoded once so several spans can be composed from it.
pub struct EncodedText {
    pub seq: CharSequence,
    pub tape: EncoderTape,
}

pub fn encode_tokens(encoder: &ContextEncoder, tokens: &[String]) -> Result<EncodedText> {
    if tokens.is_empty() {
        return Err(Error::input("cannot context-encode an empty text"));
    }
    let seq = encode_text(tokens);
    let tape = encoder.encode(&seq.indices)?;
    Ok(EncodedText { seq, tape })
}

/// Composes the word at `token_index` from its encoded span.
pub fn compose_span(
    model: &CompositionModel,
    encoded: &EncodedText,
    token_index: usize,
) -> Result<Vec<f64>> {
    let (start, end) = *encoded
        .seq
        .spans
        .get(token_index)
        .ok_or_else(|| Error::input(format!("token index {token_index} out of range")))?;
    if start == end {
        return Err(Error::input("cannot compose an empty word"));
    }
    let inputs = &encoded.tape.reps[start..end];
    Ok(model.forward_inputs(inputs, None)?.out)
}

/// One-call convenience for a single word occurrence.
pub fn compose_in_context(
    model: &CompositionModel,
    encoder: &ContextEncoder,
    tokens: &[String],
    token_index: usize,
) -> Result<Vec<f64>> {
    let encoded = encode_tokens(encoder, tokens)?;
    compose_span(model, &encoded, token_index)
}

/// Joint end-to-end training of encoder and composer. Every in-vocabulary
/// word occurrence in the texts is a training sample whose target is the
/// word's tuned embedding row, so frequent words weigh more by construction.
pub fn train_context_joint(
    texts: &[Vec<String>],
    table: &EmbeddingTable,
    vocab: &WordVocab,
    config: &ContextConfig,
) -> Result<(ContextEncoder, CompositionModel)> {
    if vocab.word_count() < 10 {
        return Err(Error::input(format!(
            "context training needs at least 10 vocabulary words, got {}",
            vocab.word_count()
        )));
    }
    let usable: Vec<usize> = (0..texts.len()).filter(|&i| !texts[i].is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::input("no nonempty training texts"));
    }
    let mut encoder = ContextEncoder::new(config)?;
    let mut composer = CompositionModel::new(encoder.rep_dim(), table.dim, &config.composer)?;

    let sequences: Vec<CharSequence> =
        texts.iter().map(|tokens| encode_text(tokens)).collect();
    let word_ids: Vec<Vec<Option<usize>>> = texts
        .iter()
        .map(|tokens| {
            tokens
                .iter()
                .map(|t| if vocab.contains(t) { Some(vocab.encode(t)) } else { None })
                .collect()
        })
        .collect();

    let (train_texts, val_texts) = holdout_word_split(
        usable.len(),
        config.composer.holdout_fraction,
        derive_seed(config.composer.seed, "context-holdout"),
    );
    let train_texts: Vec<usize> = train_texts.into_iter().map(|i| usable[i]).collect();
    let val_texts: Vec<usize> = val_texts.into_iter().map(|i| usable[i]).collect();

    let mut epoch_rng = rng_from_seed(derive_seed(config.composer.seed, "context-epochs"));
    let mut opt = Adam::new(config.composer.learning_rate);
    let mut enc_grad = encoder.bilstm.zeros_like();
    let mut comp_grad = composer.zeros_like();
    let mut order = train_texts.clone();
    let mut stopper = EarlyStopper::new(config.composer.patience.max(1));
    let mut best: Option<(ContextEncoder, CompositionModel)> = None;

    for _epoch in 0..config.composer.max_epochs {
        order.shuffle(&mut epoch_rng);
        for &ti in &order {
            let seq = &sequences[ti];
            let mut samples: Vec<((usize, usize), usize)> = Vec::new();
            for (&span, id) in seq.spans.iter().zip(word_ids[ti].iter()) {
                if let Some(wi) = id {
                    if span.0 != span.1 {
                        samples.push((span, *wi));
                    }
                }
            }
            if samples.is_empty() {
                continue;
            }
            let enc_tape = encoder.encode(&seq.indices)?;
            let mut d_reps: Vec<Vec<f64>> = vec![Vec::new(); seq.indices.len()];
            let scale = 1.0 / samples.len() as f64;
            for &((start, end), wi) in &samples {
                let inputs = &enc_tape.reps[start..end];
                let tape = composer.forward_inputs(inputs, Some(&mut epoch_rng))?;
                let loss = mse(&tape.out, table.row(wi))?;
                if !loss.is_finite() {
                    return Err(Error::Training("non-finite context training loss".into()));
                }
                let d_out: Vec<f64> = mse_backward(&tape.out, table.row(wi))
                    .into_iter()
                    .map(|v| v * scale)
                    .collect();
                let d_inputs = composer.backward(&tape, &d_out, &mut comp_grad);
                for (offset, d) in d_inputs.into_iter().enumerate() {
                    let slot = &mut d_reps[start + offset];
                    if slot.is_empty() {
                        *slot = d;
                    } else {
                        for (s, v) in slot.iter_mut().zip(d.iter()) {
                            *s += v;
                        }
                    }
                }
            }
            encoder.backward(&enc_tape, &d_reps, &mut enc_grad);
            {
                let mut params = encoder.bilstm.params_mut();
                params.extend(composer.params_mut());
                let mut grads = enc_grad.params();
                grads.extend(comp_grad.params());
                opt.step(&mut params, &grads)?;
            }
            for p in enc_grad.params_mut() {
                p.iter_mut().for_each(|v| *v = 0.0);
            }
            CompositionModel::zero_grads(&mut comp_grad);
        }

        let monitor = if val_texts.is_empty() { &train_texts } else { &val_texts };
        let mut total = 0.0;
        let mut count = 0usize;
        for &ti in monitor {
            let seq = &sequences[ti];
            let enc_tape = encoder.encode(&seq.indices)?;
            for (&(start, end), id) in seq.spans.iter().zip(word_ids[ti].iter()) {
                if let Some(wi) = id {
                    let tape = composer.forward_inputs(&enc_tape.reps[start..end], None)?;
                    total += mse(&tape.out, table.row(*wi))?;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(Error::input("no in-vocabulary spans to monitor"));
        }
        let val_loss = total / count as f64;
        if !val_loss.is_finite() {
            return Err(Error::Training("non-finite context validation loss".into()));
        }
        match stopper.observe(val_loss) {
            StopDecision::Improved => best = Some((encoder.clone(), composer.clone())),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }
    Ok(best.unwrap_or((encoder, composer)))
}
