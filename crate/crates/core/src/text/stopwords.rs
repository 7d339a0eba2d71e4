//! Stopword list handling.
//!
//! File format: UTF-8, one token per line; blank lines and lines starting
//! with '#' are ignored. Entries are lowercased on load.

use std::collections::BTreeSet;

const DEFAULT_LIST: &str = include_str!("../../data/stopwords.txt");

/// Parses a stopword list from file contents.
pub fn parse_stopwords(contents: &str) -> BTreeSet<String> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

/// The list that ships with the crate: common English function words.
pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(DEFAULT_LIST)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks_ignored() {
        let set = parse_stopwords("# heading\n\nthe\nA\n  \n#x\n");
        assert_eq!(set.len(), 2);
        assert!(set.contains("the"));
        assert!(set.contains("a"));
    }

    #[test]
    fn default_list_is_plausible() {
        let set = default_stopwords();
        assert!(set.len() >= 100);
        for w in ["the", "a", "is", "you", "are", "and"] {
            assert!(set.contains(w), "missing {w}");
        }
        assert!(!set.contains("feminist"));
    }
}
