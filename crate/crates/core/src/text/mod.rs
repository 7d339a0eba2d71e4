//! Text normalization, vocabularies, character encoding, and n-gram features.

pub mod chars;
pub mod ngram;
pub mod stopwords;
pub mod tokenize;
pub mod vocab;

pub use chars::{
    encode_text, encode_token, one_hot, one_hot_sequence, CharSequence, CHAR_DIM, UNKNOWN_CHAR,
};
pub use ngram::{NgramScope, NgramVectorizer};
pub use stopwords::{default_stopwords, parse_stopwords};
pub use tokenize::{normalize_and_tokenize, NormalizedText};
pub use vocab::{WordVocab, OOV_TOKEN};
