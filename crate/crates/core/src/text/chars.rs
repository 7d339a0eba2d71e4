//! Fixed character alphabet and character-index sequences.
//!
//! The alphabet is a-z, 0-9, and space (the word-boundary marker); everything
//! else maps to a single unknown index, so "c*nt" and "cnt" encode
//! differently instead of collapsing together.

/// a-z → 0..26, 0-9 → 26..36, space → 36, unknown → 37.
pub const ALPHABET_SIZE: usize = 37;
pub const UNKNOWN_CHAR: usize = 37;
/// One-hot dimension: alphabet plus the unknown slot.
pub const CHAR_DIM: usize = ALPHABET_SIZE + 1;
pub const SPACE_INDEX: usize = 36;

/// Index for one character.
pub fn char_index(c: char) -> usize {
    match c {
        'a'..='z' => c as usize - 'a' as usize,
        '0'..='9' => 26 + (c as usize - '0' as usize),
        ' ' => SPACE_INDEX,
        _ => UNKNOWN_CHAR,
    }
}

/// Inverse of `char_index` for in-alphabet indices.
pub fn index_char(i: usize) -> Option<char> {
    match i {
        0..=25 => Some((b'a' + i as u8) as char),
        26..=35 => Some((b'0' + (i - 26) as u8) as char),
        36 => Some(' '),
        _ => None,
    }
}

/// Character indices plus word spans when encoded from a whole text.
/// Spans are 0-based half-open ranges into `indices`, non-overlapping and
/// ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSequence {
    pub indices: Vec<usize>,
    pub spans: Vec<(usize, usize)>,
}

/// Encodes one token; the span covers the whole sequence.
pub fn encode_token(token: &str) -> CharSequence {
    let indices: Vec<usize> = token.chars().map(char_index).collect();
    let span = (0, indices.len());
    CharSequence { indices, spans: vec![span] }
}

/// Encodes tokens joined by single spaces, recording each token's span.
pub fn encode_text(tokens: &[String]) -> CharSequence {
    let mut indices = Vec::new();
    let mut spans = Vec::with_capacity(tokens.len());
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            indices.push(SPACE_INDEX);
        }
        let start = indices.len();
        indices.extend(tok.chars().map(char_index));
        spans.push((start, indices.len()));
    }
    CharSequence { indices, spans }
}

/// One-hot vector of dimension [`CHAR_DIM`].
pub fn one_hot(index: usize) -> Vec<f64> {
    let mut v = vec![0.0; CHAR_DIM];
    v[index] = 1.0;
    v
}

/// One-hot rows for a whole sequence.
pub fn one_hot_sequence(indices: &[usize]) -> Vec<Vec<f64>> {
    indices.iter().map(|&i| one_hot(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_layout() {
        assert_eq!(char_index('a'), 0);
        assert_eq!(char_index('z'), 25);
        assert_eq!(char_index('0'), 26);
        assert_eq!(char_index('9'), 35);
        assert_eq!(char_index(' '), SPACE_INDEX);
        assert_eq!(char_index('*'), UNKNOWN_CHAR);
        assert_eq!(char_index('é'), UNKNOWN_CHAR);
    }

    #[test]
    fn token_encoding() {
        assert_eq!(encode_token("ab1").indices, vec![0, 1, 27]);
        assert_eq!(
            encode_token("c*nt").indices,
            vec![2, UNKNOWN_CHAR, 13, 19]
        );
    }

    #[test]
    fn text_encoding_records_spans_around_spaces() {
        let seq = encode_text(&["cat".into(), "sat".into()]);
        assert_eq!(seq.indices.len(), 7);
        assert_eq!(seq.indices[3], SPACE_INDEX);
        assert_eq!(seq.spans, vec![(0, 3), (4, 7)]);
    }

    #[test]
    fn round_trip_in_alphabet() {
        let s = "the quick brown f0x 99";
        let seq = encode_token(s);
        let back: String = seq
            .indices
            .iter()
            .map(|&i| index_char(i).unwrap())
            .collect();
        assert_eq!(back, s);
    }

    #[test]
    fn one_hot_is_unit() {
        let v = one_hot(char_index('q'));
        assert_eq!(v.len(), CHAR_DIM);
        assert_eq!(v.iter().sum::<f64>(), 1.0);
        assert_eq!(v[16], 1.0);
    }
}
