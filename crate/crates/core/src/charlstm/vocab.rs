use serde::{Deserialize, Serialize};

pub const PAD: usize = 0;
pub const DEFAULT_MAX_LEN: usize = 10;

/// Pad symbol at index 0, then `a-z`, `0-9` and `_`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharVocab {
    chars: Vec<char>,
}

impl Default for CharVocab {
    fn default() -> Self {
        let chars = ('a'..='z').chain('0'..='9').chain(std::iter::once('_')).collect();
        CharVocab { chars }
    }
}

/// An index sequence plus the number of characters that fell outside the
/// vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub indices: Vec<usize>,
    pub unknown: usize,
}

impl CharVocab {
    /// Size including the pad symbol.
    pub fn len(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, c: char) -> Option<usize> {
        self.chars.iter().position(|&v| v == c).map(|i| i + 1)
    }

    pub fn symbol(&self, index: usize) -> Option<char> {
        index.checked_sub(1).and_then(|i| self.chars.get(i).copied())
    }

    /// Lowercases, keeps the first `max_len` characters and left-pads.
    pub fn encode(&self, handle: &str, max_len: usize) -> Encoded {
        let mut unknown = 0;
        let body: Vec<usize> = handle
            .chars()
            .flat_map(char::to_lowercase)
            .take(max_len)
            .map(|c| {
                self.index(c).unwrap_or_else(|| {
                    unknown += 1;
                    PAD
                })
            })
            .collect();
        let mut indices = vec![PAD; max_len - body.len()];
        indices.extend(body);
        Encoded { indices, unknown }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let v = CharVocab::default();
        assert_eq!(v.len(), 38);
        assert_eq!(v.index('a'), Some(1));
        assert_eq!(v.index('_'), Some(37));
        for i in 1..v.len() {
            assert_eq!(v.index(v.symbol(i).unwrap()), Some(i));
        }
        assert_eq!(v.symbol(PAD), None);
    }

    #[test]
    fn padding_truncation_and_case() {
        let v = CharVocab::default();
        let e = v.encode("ab", 10);
        assert_eq!(e.indices, vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 2]);
        let long = v.encode("abcdefghijkl", 10);
        assert_eq!(long.indices, (1..=10).collect::<Vec<_>>());
        assert_eq!(v.encode("AB", 10), v.encode("ab", 10));
        let odd = v.encode("a.b", 10);
        assert_eq!(odd.unknown, 1);
        assert_eq!(&odd.indices[7..], &[1, 0, 2]);
    }

    proptest! {
        #[test]
        fn encoding_is_total(s in "\\PC{0,30}") {
            let e = CharVocab::default().encode(&s, 10);
            prop_assert_eq!(e.indices.len(), 10);
            prop_assert!(e.indices.iter().all(|&i| i < 38));
        }
    }
}
