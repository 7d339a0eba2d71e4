//! Text classification for abusive language that stays robust when words are
//! obfuscated: recurrent document classifiers, character n-gram features, and
//! character-level composition models that build embeddings for words never
//! seen in training.

pub mod bench;
pub mod config;
pub mod container;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod eval;
pub mod gbdt;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod text;

pub use error::{Error, Result};
