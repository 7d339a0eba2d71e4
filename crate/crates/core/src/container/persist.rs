//! Section payload codecs for every persistable component.
//!
//! Each `encode_*`/`decode_*` pair round-trips one component through the
//! f32 parameter encoding. Decoders validate shapes and index bounds so a
//! tampered payload that passes the checksum still cannot produce a model
//! that panics or loops at prediction time.

use super::codec::{Reader, Writer};
use crate::embed::{EmbeddingTable, Provenance};
use crate::error::{Error, Result};
use crate::gbdt::{DecisionTree, GbdtConfig, GbdtEnsemble, Node};
use crate::models::{C2wModel, CompositionModel, ContextEncoder, RecurrentClassifier, SequenceEncoder};
use crate::nn::conv::ConvBank;
use crate::nn::gru::GruCell;
use crate::nn::lstm::LstmCell;
use crate::nn::{BiLstm, ConvMaxPool, Dense, Gru, Lstm, Matrix};
use crate::text::{NgramScope, NgramVectorizer, WordVocab};

pub fn encode_matrix(w: &mut Writer, m: &Matrix) {
    w.put_u32(m.rows as u32);
    w.put_u32(m.cols as u32);
    w.put_params(&m.data);
}

pub fn decode_matrix(r: &mut Reader) -> Result<Matrix> {
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let data = r.params()?;
    if data.len() != rows * cols {
        return Err(Error::container(format!(
            "matrix payload holds {} values for a {rows}x{cols} shape",
            data.len()
        )));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn encode_dense(w: &mut Writer, d: &Dense) {
    encode_matrix(w, &d.w);
    w.put_params(&d.b);
}

pub fn decode_dense(r: &mut Reader) -> Result<Dense> {
    let w = decode_matrix(r)?;
    let b = r.params()?;
    if b.len() != w.rows {
        return Err(Error::container("dense bias length does not match weights"));
    }
    Ok(Dense { w, b })
}

fn encode_gru_cell(w: &mut Writer, c: &GruCell) {
    for m in [&c.wz, &c.uz, &c.wr, &c.ur, &c.wh, &c.uh] {
        encode_matrix(w, m);
    }
    for b in [&c.bz, &c.br, &c.bh] {
        w.put_params(b);
    }
}

fn decode_gru_cell(r: &mut Reader) -> Result<GruCell> {
    let wz = decode_matrix(r)?;
    let uz = decode_matrix(r)?;
    let wr = decode_matrix(r)?;
    let ur = decode_matrix(r)?;
    let wh = decode_matrix(r)?;
    let uh = decode_matrix(r)?;
    let bz = r.params()?;
    let br = r.params()?;
    let bh = r.params()?;
    let hid = wz.rows;
    let input = wz.cols;
    let shapes_ok = [&wr, &wh].iter().all(|m| m.rows == hid && m.cols == input)
        && [&uz, &ur, &uh].iter().all(|m| m.rows == hid && m.cols == hid)
        && [&bz, &br, &bh].iter().all(|b| b.len() == hid);
    if !shapes_ok {
        return Err(Error::container("inconsistent recurrent gate shapes"));
    }
    Ok(GruCell { wz, uz, bz, wr, ur, br, wh, uh, bh })
}

pub fn encode_gru(w: &mut Writer, g: &Gru) {
    w.put_u32(g.layers.len() as u32);
    for cell in &g.layers {
        encode_gru_cell(w, cell);
    }
}

pub fn decode_gru(r: &mut Reader) -> Result<Gru> {
    let n = r.u32()? as usize;
    if n == 0 {
        return Err(Error::container("recurrent stack with zero layers"));
    }
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        layers.push(decode_gru_cell(r)?);
    }
    for i in 1..layers.len() {
        if layers[i].wz.cols != layers[i - 1].wz.rows {
            return Err(Error::container("stacked layer input does not match layer below"));
        }
    }
    Ok(Gru { layers })
}

fn encode_lstm_cell(w: &mut Writer, c: &LstmCell) {
    encode_matrix(w, &c.w);
    encode_matrix(w, &c.u);
    w.put_params(&c.b);
}

fn decode_lstm_cell(r: &mut Reader) -> Result<LstmCell> {
    let w = decode_matrix(r)?;
    let u = decode_matrix(r)?;
    let b = r.params()?;
    let hid = u.cols;
    if w.rows != 4 * hid || u.rows != 4 * hid || b.len() != 4 * hid {
        return Err(Error::container("inconsistent recurrent gate shapes"));
    }
    Ok(LstmCell { w, u, b })
}

fn encode_lstm(w: &mut Writer, l: &Lstm) {
    w.put_u32(l.layers.len() as u32);
    for cell in &l.layers {
        encode_lstm_cell(w, cell);
    }
}

fn decode_lstm(r: &mut Reader) -> Result<Lstm> {
    let n = r.u32()? as usize;
    if n == 0 {
        return Err(Error::container("recurrent stack with zero layers"));
    }
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        layers.push(decode_lstm_cell(r)?);
    }
    for i in 1..layers.len() {
        if layers[i].w.cols != layers[i - 1].u.cols {
            return Err(Error::container("stacked layer input does not match layer below"));
        }
    }
    Ok(Lstm { layers })
}

pub fn encode_bilstm(w: &mut Writer, b: &BiLstm) {
    encode_lstm(w, &b.fwd);
    encode_lstm(w, &b.bwd);
}

pub fn decode_bilstm(r: &mut Reader) -> Result<BiLstm> {
    let fwd = decode_lstm(r)?;
    let bwd = decode_lstm(r)?;
    if fwd.layers.len() != bwd.layers.len()
        || fwd.layers[0].w.cols != bwd.layers[0].w.cols
        || fwd.layers[0].u.cols != bwd.layers[0].u.cols
    {
        return Err(Error::container("bidirectional halves disagree on shape"));
    }
    Ok(BiLstm { fwd, bwd })
}

fn encode_conv(w: &mut Writer, c: &ConvMaxPool) {
    w.put_usize(c.input_dim);
    w.put_u32(c.banks.len() as u32);
    for bank in &c.banks {
        w.put_usize(bank.width);
        encode_matrix(w, &bank.w);
        w.put_params(&bank.b);
    }
}

fn decode_conv(r: &mut Reader) -> Result<ConvMaxPool> {
    let input_dim = r.usize()?;
    let n = r.u32()? as usize;
    if input_dim == 0 || n == 0 {
        return Err(Error::container("empty convolution stack"));
    }
    let mut banks = Vec::with_capacity(n);
    for _ in 0..n {
        let width = r.usize()?;
        let w = decode_matrix(r)?;
        let b = r.params()?;
        if width == 0 || w.cols != width * input_dim || b.len() != w.rows {
            return Err(Error::container("convolution bank shape mismatch"));
        }
        banks.push(ConvBank { width, w, b });
    }
    Ok(ConvMaxPool { input_dim, banks })
}

pub fn encode_composer(w: &mut Writer, m: &CompositionModel) {
    match &m.encoder {
        SequenceEncoder::BiLstm(b) => {
            w.put_u8(0);
            encode_bilstm(w, b);
        }
        SequenceEncoder::Cnn(c) => {
            w.put_u8(1);
            encode_conv(w, c);
        }
    }
    encode_dense(w, &m.hidden);
    encode_dense(w, &m.output);
    w.put_usize(m.input_dim);
    w.put_f64(m.dropout);
}

pub fn decode_composer(r: &mut Reader) -> Result<CompositionModel> {
    let encoder = match r.u8()? {
        0 => SequenceEncoder::BiLstm(decode_bilstm(r)?),
        1 => SequenceEncoder::Cnn(decode_conv(r)?),
        tag => return Err(Error::container(format!("unknown encoder tag {tag}"))),
    };
    let hidden = decode_dense(r)?;
    let output = decode_dense(r)?;
    let input_dim = r.usize()?;
    let dropout = r.f64()?;
    if output.input_dim() != hidden.output_dim() {
        return Err(Error::container("composer head shapes disagree"));
    }
    Ok(CompositionModel { encoder, hidden, output, input_dim, dropout })
}

pub fn encode_context_encoder(w: &mut Writer, e: &ContextEncoder) {
    encode_bilstm(w, &e.bilstm);
}

pub fn decode_context_encoder(r: &mut Reader) -> Result<ContextEncoder> {
    Ok(ContextEncoder { bilstm: decode_bilstm(r)? })
}

pub fn encode_recurrent(w: &mut Writer, m: &RecurrentClassifier) {
    encode_gru(w, &m.gru);
    encode_dense(w, &m.output);
    w.put_f64(m.dropout);
    w.put_usize(m.n_classes);
}

pub fn decode_recurrent(r: &mut Reader) -> Result<RecurrentClassifier> {
    let gru = decode_gru(r)?;
    let output = decode_dense(r)?;
    let dropout = r.f64()?;
    let n_classes = r.usize()?;
    if output.output_dim() != n_classes {
        return Err(Error::container("classifier head does not match class count"));
    }
    Ok(RecurrentClassifier { gru, output, dropout, n_classes })
}

pub fn encode_c2w(w: &mut Writer, m: &C2wModel) {
    encode_bilstm(w, &m.word_encoder);
    encode_dense(w, &m.word_proj);
    encode_gru(w, &m.gru);
    encode_dense(w, &m.output);
    w.put_f64(m.dropout);
    w.put_usize(m.n_classes);
}

pub fn decode_c2w(r: &mut Reader) -> Result<C2wModel> {
    let word_encoder = decode_bilstm(r)?;
    let word_proj = decode_dense(r)?;
    let gru = decode_gru(r)?;
    let output = decode_dense(r)?;
    let dropout = r.f64()?;
    let n_classes = r.usize()?;
    if output.output_dim() != n_classes || gru.layers[0].wz.cols != word_proj.output_dim() {
        return Err(Error::container("character model head shapes disagree"));
    }
    Ok(C2wModel { word_encoder, word_proj, gru, output, dropout, n_classes })
}

pub fn encode_table(w: &mut Writer, t: &EmbeddingTable) {
    w.put_usize(t.dim);
    encode_matrix(w, &t.rows);
    w.put_u32(t.provenance.len() as u32);
    for p in &t.provenance {
        w.put_u8(p.tag());
    }
}

pub fn decode_table(r: &mut Reader) -> Result<EmbeddingTable> {
    let dim = r.usize()?;
    let rows = decode_matrix(r)?;
    let n = r.u32()? as usize;
    if rows.cols != dim || rows.rows != n || n == 0 {
        return Err(Error::container("embedding table shape mismatch"));
    }
    let mut provenance = Vec::with_capacity(n);
    for _ in 0..n {
        provenance.push(Provenance::from_tag(r.u8()?)?);
    }
    Ok(EmbeddingTable { dim, rows, provenance })
}

pub fn encode_vocab(w: &mut Writer, v: &WordVocab) {
    w.put_u32(v.words().len() as u32);
    for word in v.words() {
        w.put_str(word);
    }
    w.put_u64_slice(v.frequencies());
}

pub fn decode_vocab(r: &mut Reader) -> Result<WordVocab> {
    let n = r.u32()? as usize;
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        words.push(r.string()?);
    }
    let freqs = r.u64_slice()?;
    WordVocab::from_parts(words, freqs)
}

pub fn encode_vectorizer(w: &mut Writer, v: &NgramVectorizer) {
    w.put_usize(v.n_min);
    w.put_usize(v.n_max);
    w.put_u8(match v.scope {
        NgramScope::Text => 0,
        NgramScope::Token => 1,
    });
    w.put_u32(v.column_names().len() as u32);
    for name in v.column_names() {
        w.put_str(name);
    }
}

pub fn decode_vectorizer(r: &mut Reader) -> Result<NgramVectorizer> {
    let n_min = r.usize()?;
    let n_max = r.usize()?;
    let scope = match r.u8()? {
        0 => NgramScope::Text,
        1 => NgramScope::Token,
        tag => return Err(Error::container(format!("unknown n-gram scope tag {tag}"))),
    };
    let n = r.u32()? as usize;
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        names.push(r.string()?);
    }
    NgramVectorizer::from_parts(n_min, n_max, scope, names)
}

fn encode_tree(w: &mut Writer, t: &DecisionTree) {
    w.put_u32(t.nodes.len() as u32);
    for node in &t.nodes {
        match node {
            Node::Leaf(v) => {
                w.put_u8(0);
                w.put_f32(*v);
            }
            Node::Split { feature, threshold, left, right } => {
                w.put_u8(1);
                w.put_u32(*feature as u32);
                w.put_f32(*threshold);
                w.put_u32(*left as u32);
                w.put_u32(*right as u32);
            }
        }
    }
}

fn decode_tree(r: &mut Reader, n_features: usize) -> Result<DecisionTree> {
    let n = r.u32()? as usize;
    if n == 0 {
        return Err(Error::container("tree with no nodes"));
    }
    let mut nodes = Vec::with_capacity(n);
    for at in 0..n {
        let node = match r.u8()? {
            0 => Node::Leaf(r.f32()?),
            1 => {
                let feature = r.u32()? as usize;
                let threshold = r.f32()?;
                let left = r.u32()? as usize;
                let right = r.u32()? as usize;
                // Children always sit after their parent, which rules out
                // traversal cycles in tampered payloads.
                if feature >= n_features || left <= at || right <= at || left >= n || right >= n {
                    return Err(Error::container("tree split out of bounds"));
                }
                Node::Split { feature, threshold, left, right }
            }
            tag => return Err(Error::container(format!("unknown tree node tag {tag}"))),
        };
        nodes.push(node);
    }
    Ok(DecisionTree { nodes })
}

pub fn encode_gbdt(w: &mut Writer, g: &GbdtEnsemble) {
    w.put_usize(g.n_classes);
    w.put_usize(g.n_features);
    w.put_u32(g.config.rounds as u32);
    w.put_f64(g.config.learning_rate);
    w.put_u32(g.config.max_depth as u32);
    w.put_u32(g.config.min_leaf as u32);
    w.put_f64(g.config.lambda);
    w.put_params(&g.priors);
    w.put_u32(g.trees.len() as u32);
    for round in &g.trees {
        for tree in round {
            encode_tree(w, tree);
        }
    }
}

pub fn decode_gbdt(r: &mut Reader) -> Result<GbdtEnsemble> {
    let n_classes = r.usize()?;
    let n_features = r.usize()?;
    let config = GbdtConfig {
        rounds: r.u32()? as usize,
        learning_rate: r.f64()?,
        max_depth: r.u32()? as usize,
        min_leaf: r.u32()? as usize,
        lambda: r.f64()?,
    };
    let priors = r.params()?;
    if n_classes < 2 || priors.len() != n_classes {
        return Err(Error::container("ensemble priors do not match class count"));
    }
    let rounds = r.u32()? as usize;
    let mut trees = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut round = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            round.push(decode_tree(r, n_features)?);
        }
        trees.push(round);
    }
    Ok(GbdtEnsemble { n_classes, n_features, config, priors, trees })
}
