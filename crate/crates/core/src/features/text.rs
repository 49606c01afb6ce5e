//! Tweet text helpers: URL and hashtag counting and a word-list sentiment scorer.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// Number of whitespace-separated tokens that are `http://` or `https://` links.
pub fn count_urls(text: &str) -> u64 {
    text.split_whitespace()
        .filter(|tok| {
            let lower = tok.to_ascii_lowercase();
            lower.starts_with("http://") || lower.starts_with("https://")
        })
        .count() as u64
}

/// Number of whitespace-separated tokens of the form `#tag`.
pub fn count_hashtags(text: &str) -> u64 {
    text.split_whitespace()
        .filter(|tok| {
            let mut chars = tok.chars();
            chars.next() == Some('#')
                && chars.next().is_some_and(|c| c.is_alphanumeric() || c == '_')
        })
        .count() as u64
}

/// Lowercased tokens, splitting on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

const POSITIVE_WORDS: &[&str] = &[
    "good", "great", "happy", "love", "peace", "wonderful", "beautiful", "thanks", "hope", "joy",
    "kind", "blessed", "friend", "smile", "win", "best", "nice", "proud", "safe", "support",
];

const NEGATIVE_WORDS: &[&str] = &[
    "bad", "hate", "kill", "war", "death", "enemy", "attack", "destroy", "angry", "fear",
    "revenge", "blood", "punish", "traitor", "evil", "crush", "burn", "threat", "fight", "die",
];

/// Positive and negative word lists.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl Lexicon {
    pub fn new<P, N>(positive: P, negative: N) -> Self
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        Lexicon {
            positive: positive.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
            negative: negative.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    /// The small built-in English lexicon.
    pub fn bundled() -> Self {
        Self::new(POSITIVE_WORDS, NEGATIVE_WORDS)
    }

    /// Loads two word-per-line files. Blank lines and `#` comments are skipped.
    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self> {
        let read = |p: &Path| -> Result<Vec<String>> {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned)
                .collect())
        };
        Ok(Self::new(read(positive)?, read(negative)?))
    }

    pub fn positive_words(&self) -> impl Iterator<Item = &str> {
        self.positive.iter().map(String::as_str)
    }

    pub fn negative_words(&self) -> impl Iterator<Item = &str> {
        self.negative.iter().map(String::as_str)
    }

    /// `(positive hits, negative hits)` over the tokens of `text`.
    pub fn score(&self, text: &str) -> (f64, f64) {
        let mut pos = 0u32;
        let mut neg = 0u32;
        for tok in tokenize(text) {
            if self.positive.contains(&tok) {
                pos += 1;
            }
            if self.negative.contains(&tok) {
                neg += 1;
            }
        }
        (pos as f64, neg as f64)
    }
}

/// Scores `text` against `lexicon`.
pub fn lexicon_sentiment(text: &str, lexicon: &Lexicon) -> (f64, f64) {
    lexicon.score(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_links_and_tags() {
        let t = "see https://t.co/x and HTTP://a.b #isis #_x # #";
        assert_eq!(count_urls(t), 2);
        assert_eq!(count_hashtags(t), 2);
        assert_eq!(count_urls(""), 0);
    }

    #[test]
    fn lexicon_counts() {
        let lex = Lexicon::new(["great", "wonderful"], ["bad"]);
        assert_eq!(lexicon_sentiment("great wonderful day", &lex), (2.0, 0.0));
        assert_eq!(lexicon_sentiment("", &lex), (0.0, 0.0));
        let lex = Lexicon::new(["good"], ["bad"]);
        assert_eq!(lexicon_sentiment("bad bad good", &lex), (1.0, 2.0));
        assert_eq!(lexicon_sentiment("Bad, BAD! good.", &lex), (1.0, 2.0));
    }

    #[test]
    fn lexicon_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pos.txt");
        let n = dir.path().join("neg.txt");
        std::fs::write(&p, "# positive\nGood\n\n").unwrap();
        std::fs::write(&n, "bad\n").unwrap();
        let lex = Lexicon::from_files(&p, &n).unwrap();
        assert_eq!(lex.score("good bad bad"), (1.0, 2.0));
    }
}
