//! Normalization and tokenization.
//!
//! Lowercase, split on whitespace, strip edge punctuation from each token,
//! drop stopwords. Characters {*, #, @} and anything alphanumeric survive
//! stripping wherever they appear, and internal punctuation is never touched,
//! so obfuscations like "c*nt", "w0m3n", or "#mkr" come through intact.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedText {
    pub original: String,
    /// Tokens joined by single spaces.
    pub normalized: String,
    pub tokens: Vec<String>,
}

impl NormalizedText {
    /// Wraps already-normalized tokens (no stripping or stopword removal).
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let normalized = tokens.join(" ");
        NormalizedText { original: normalized.clone(), normalized, tokens }
    }
}

fn keep_at_edge(c: char) -> bool {
    c.is_alphanumeric() || c == '*' || c == '#' || c == '@'
}

fn strip_edges(token: &str) -> &str {
    token
        .trim_start_matches(|c| !keep_at_edge(c))
        .trim_end_matches(|c| !keep_at_edge(c))
}

pub fn normalize_and_tokenize(text: &str, stopwords: &BTreeSet<String>) -> NormalizedText {
    let lower = text.to_lowercase();
    let tokens: Vec<String> = lower
        .split_whitespace()
        .map(strip_edges)
        .filter(|t| !t.is_empty())
        .filter(|t| !stopwords.contains(*t))
        .map(str::to_string)
        .collect();
    NormalizedText {
        original: text.to_string(),
        normalized: tokens.join(" "),
        tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn lowercases_strips_and_drops_stopwords() {
        let out = normalize_and_tokenize("You feminist Cnt!", &set(&["you"]));
        assert_eq!(out.tokens, vec!["feminist", "cnt"]);
        assert_eq!(out.normalized, "feminist cnt");
        assert_eq!(out.original, "You feminist Cnt!");
    }

    #[test]
    fn digit_obfuscations_survive() {
        let out = normalize_and_tokenize("w0m3n are a5sh0les", &set(&["are"]));
        assert_eq!(out.tokens, vec!["w0m3n", "a5sh0les"]);
    }

    #[test]
    fn empty_input_empty_tokens() {
        let out = normalize_and_tokenize("", &set(&[]));
        assert!(out.tokens.is_empty());
        assert_eq!(out.normalized, "");
    }

    #[test]
    fn star_hash_at_survive_everywhere() {
        let out = normalize_and_tokenize("c*nt #mkr @user *wink*", &set(&[]));
        assert_eq!(out.tokens, vec!["c*nt", "#mkr", "@user", "*wink*"]);
    }

    #[test]
    fn internal_punctuation_kept_edges_stripped() {
        let out = normalize_and_tokenize("\"don't\" (really?)", &set(&[]));
        assert_eq!(out.tokens, vec!["don't", "really"]);
    }

    #[test]
    fn pure_punctuation_tokens_vanish() {
        let out = normalize_and_tokenize("wow !! ... ok", &set(&[]));
        assert_eq!(out.tokens, vec!["wow", "ok"]);
    }

    #[test]
    fn idempotent_on_own_output() {
        let stop = set(&["the", "a"]);
        let first = normalize_and_tokenize("The c*nt, a W0m3n... #tag!", &stop);
        let second = normalize_and_tokenize(&first.normalized, &stop);
        assert_eq!(first.tokens, second.tokens);
        assert_eq!(first.normalized, second.normalized);
    }
}
