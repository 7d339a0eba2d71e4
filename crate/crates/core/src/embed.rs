//! Word embedding tables: pretrained ingestion, random initialization,
//! lookup with OOV fallback, and cosine nearest neighbors.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::init::uniform;
use crate::nn::matrix::{cosine, Matrix};
use crate::rng::ChaCha8Rng;
use crate::text::WordVocab;

/// Where a row's current value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Pretrained,
    RandomInit,
    TaskTuned,
    Composed,
}

impl Provenance {
    pub fn tag(self) -> u8 {
        match self {
            Provenance::Pretrained => 0,
            Provenance::RandomInit => 1,
            Provenance::TaskTuned => 2,
            Provenance::Composed => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Provenance> {
        Ok(match tag {
            0 => Provenance::Pretrained,
            1 => Provenance::RandomInit,
            2 => Provenance::TaskTuned,
            3 => Provenance::Composed,
            _ => return Err(Error::Container(format!("unknown provenance tag {tag}"))),
        })
    }
}

/// Init range for words without a pretrained vector and for the OOV row.
pub const RANDOM_INIT_RANGE: f64 = 0.05;

/// One row per real word plus a final OOV row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub rows: Matrix,
    pub provenance: Vec<Provenance>,
}

impl EmbeddingTable {
    /// All rows drawn uniform(±0.05), flagged random-init.
    pub fn random_init(vocab: &WordVocab, dim: usize, rng: &mut ChaCha8Rng) -> Result<EmbeddingTable> {
        if dim == 0 {
            return Err(Error::config("embedding dimension must be positive"));
        }
        let n = vocab.len();
        let mut rows = Matrix::zeros(n, dim);
        for r in 0..n {
            uniform(rows.row_mut(r), RANDOM_INIT_RANGE, rng);
        }
        Ok(EmbeddingTable { dim, rows, provenance: vec![Provenance::RandomInit; n] })
    }

    /// Reads a token-plus-floats-per-line file; vocab words found there get
    /// the file vector, everything else (OOV row included) gets uniform(±0.05).
    /// File tokens outside the vocab are discarded.
    pub fn load_pretrained(
        path: &Path,
        vocab: &WordVocab,
        rng: &mut ChaCha8Rng,
    ) -> Result<EmbeddingTable> {
        let file = std::fs::File::open(path)?;
        Self::read_pretrained(std::io::BufReader::new(file), vocab, rng)
    }

    pub fn read_pretrained(
        reader: impl BufRead,
        vocab: &WordVocab,
        rng: &mut ChaCha8Rng,
    ) -> Result<EmbeddingTable> {
        let mut dim: Option<usize> = None;
        let mut pending: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut seen = vec![false; vocab.len()];
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let token = fields
                .next()
                .ok_or_else(|| Error::format(lineno, "missing token"))?;
            let mut values = Vec::new();
            for field in fields {
                if field.is_empty() {
                    continue;
                }
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::format(lineno, format!("bad float {field:?}")))?;
                if !v.is_finite() {
                    return Err(Error::format(lineno, "non-finite embedding value"));
                }
                values.push(v);
            }
            if values.is_empty() {
                return Err(Error::format(lineno, "no embedding values"));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::format(
                        lineno,
                        format!("dimension {} conflicts with earlier {}", values.len(), d),
                    ));
                }
                _ => {}
            }
            if vocab.contains(token) {
                let idx = vocab.encode(token);
                if !seen[idx] {
                    seen[idx] = true;
                    pending.push((idx, values));
                }
            }
        }
        let dim = dim.ok_or_else(|| Error::Format {
            line: None,
            msg: "empty embedding file".into(),
        })?;
        let n = vocab.len();
        let mut rows = Matrix::zeros(n, dim);
        let mut provenance = vec![Provenance::RandomInit; n];
        for r in 0..n {
            uniform(rows.row_mut(r), RANDOM_INIT_RANGE, rng);
        }
        for (idx, values) in pending {
            rows.row_mut(idx).copy_from_slice(&values);
            provenance[idx] = Provenance::Pretrained;
        }
        Ok(EmbeddingTable { dim, rows, provenance })
    }

    pub fn oov_index(&self) -> usize {
        self.rows.rows - 1
    }

    pub fn row(&self, index: usize) -> &[f64] {
        self.rows.row(index)
    }

    pub fn row_mut(&mut self, index: usize) -> &mut [f64] {
        self.rows.row_mut(index)
    }

    /// Row for a token; unseen tokens fall back to the OOV row.
    pub fn lookup<'a>(&'a self, token: &str, vocab: &WordVocab) -> &'a [f64] {
        self.rows.row(vocab.encode(token))
    }

    pub fn mark_tuned(&mut self, index: usize) {
        self.provenance[index] = Provenance::TaskTuned;
    }

    /// Descending-cosine neighbors of `query` over real-word rows. The OOV
    /// row never appears; `exclude` drops a word from its own results. Ties
    /// break toward the lower vocabulary index.
    pub fn nearest_neighbors(
        &self,
        query: &[f64],
        vocab: &WordVocab,
        k: usize,
        exclude: Option<usize>,
    ) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if query.len() != self.dim {
            return Err(Error::input("query dimension mismatch"));
        }
        if query.iter().all(|v| *v == 0.0) {
            return Err(Error::input("zero query vector"));
        }
        let mut scored: Vec<(usize, f64)> = vocab
            .word_indices()
            .filter(|idx| Some(*idx) != exclude)
            .map(|idx| (idx, cosine(query, self.rows.row(idx))))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(idx, sim)| (vocab.word(idx).to_string(), sim))
            .collect())
    }
}
