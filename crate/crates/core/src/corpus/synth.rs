//! Seeded synthetic corpora.
//!
//! Positive handles are mutated copies of a small pool of template stems, so
//! positives are closer to each other in edit distance than to negatives.
//! `similarity_bias` controls how much of a stem survives: at 1.0 a handle is
//! its stem verbatim, at 0.0 every character and the length are resampled
//! and positive handles follow exactly the negative handle distribution.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use super::{AccountRecord, Corpus, Label, Provenance, TweetRecord};
use crate::error::{Error, Result};
use crate::features::text::Lexicon;

const HANDLE_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
const DIGITS: &[u8] = b"0123456789";
const MAX_ATTEMPTS: usize = 10_000;

const FILLER_WORDS: &[&str] = &[
    "the", "news", "today", "people", "city", "video", "now", "watch", "read", "time", "world",
    "said", "new", "after", "state", "they", "our", "brothers", "report", "live",
];

/// Generator settings. Every key has a default, so a config file only needs
/// the keys it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_unlabeled: usize,
    /// Share of unlabeled accounts drawn from the positive generator.
    pub unlabeled_positive_fraction: f64,
    pub similarity_bias: f64,
    pub n_stems: usize,
    pub min_handle_len: usize,
    pub max_handle_len: usize,
    pub stem_min_digits: usize,
    pub stem_max_digits: usize,
    /// Distinct letters each stem draws from.
    pub stem_alphabet_size: usize,
    pub tweets_mean: f64,

    pub pos_followers_mean: f64,
    pub pos_friends_mean: f64,
    pub pos_statuses_mean: f64,
    pub pos_p_description: f64,
    pub pos_p_location: f64,
    pub pos_p_verified: f64,
    pub pos_p_geo: f64,
    pub pos_url_rate: f64,
    pub pos_hashtag_rate: f64,
    pub pos_p_negative_tweet: f64,

    pub neg_followers_mean: f64,
    pub neg_friends_mean: f64,
    pub neg_statuses_mean: f64,
    pub neg_p_description: f64,
    pub neg_p_location: f64,
    pub neg_p_verified: f64,
    pub neg_p_geo: f64,
    pub neg_url_rate: f64,
    pub neg_hashtag_rate: f64,
    pub neg_p_negative_tweet: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_positive: 150,
            n_negative: 150,
            n_unlabeled: 3000,
            unlabeled_positive_fraction: 0.5,
            similarity_bias: 0.9,
            n_stems: 12,
            min_handle_len: 8,
            max_handle_len: 12,
            stem_min_digits: 2,
            stem_max_digits: 3,
            stem_alphabet_size: 4,
            tweets_mean: 3.0,

            pos_followers_mean: 120.0,
            pos_friends_mean: 250.0,
            pos_statuses_mean: 900.0,
            pos_p_description: 0.45,
            pos_p_location: 0.25,
            pos_p_verified: 0.0,
            pos_p_geo: 0.15,
            pos_url_rate: 0.8,
            pos_hashtag_rate: 2.0,
            pos_p_negative_tweet: 0.7,

            neg_followers_mean: 800.0,
            neg_friends_mean: 450.0,
            neg_statuses_mean: 4000.0,
            neg_p_description: 0.8,
            neg_p_location: 0.6,
            neg_p_verified: 0.03,
            neg_p_geo: 0.35,
            neg_url_rate: 0.4,
            neg_hashtag_rate: 0.6,
            neg_p_negative_tweet: 0.3,
        }
    }
}

/// Per-class profile and content distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProfile {
    pub followers_mean: f64,
    pub friends_mean: f64,
    pub statuses_mean: f64,
    pub p_description: f64,
    pub p_location: f64,
    pub p_verified: f64,
    pub p_geo: f64,
    pub url_rate: f64,
    pub hashtag_rate: f64,
    pub p_negative_tweet: f64,
}

impl SynthConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SynthConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn profile(&self, label: Label) -> ClassProfile {
        match label {
            Label::Positive => ClassProfile {
                followers_mean: self.pos_followers_mean,
                friends_mean: self.pos_friends_mean,
                statuses_mean: self.pos_statuses_mean,
                p_description: self.pos_p_description,
                p_location: self.pos_p_location,
                p_verified: self.pos_p_verified,
                p_geo: self.pos_p_geo,
                url_rate: self.pos_url_rate,
                hashtag_rate: self.pos_hashtag_rate,
                p_negative_tweet: self.pos_p_negative_tweet,
            },
            _ => ClassProfile {
                followers_mean: self.neg_followers_mean,
                friends_mean: self.neg_friends_mean,
                statuses_mean: self.neg_statuses_mean,
                p_description: self.neg_p_description,
                p_location: self.neg_p_location,
                p_verified: self.neg_p_verified,
                p_geo: self.neg_p_geo,
                url_rate: self.neg_url_rate,
                hashtag_rate: self.neg_hashtag_rate,
                p_negative_tweet: self.neg_p_negative_tweet,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if !(0.0..=1.0).contains(&self.similarity_bias) {
            return err(format!("similarity_bias must be in [0, 1], got {}", self.similarity_bias));
        }
        if !(0.0..=1.0).contains(&self.unlabeled_positive_fraction) {
            return err("unlabeled_positive_fraction must be in [0, 1]".into());
        }
        if self.min_handle_len == 0 || self.min_handle_len > self.max_handle_len {
            return err("need 1 <= min_handle_len <= max_handle_len".into());
        }
        if self.max_handle_len > super::MAX_HANDLE_LEN {
            return err(format!("max_handle_len must be <= {}", super::MAX_HANDLE_LEN));
        }
        if self.stem_min_digits > self.stem_max_digits || self.stem_max_digits >= self.min_handle_len {
            return err("need stem_min_digits <= stem_max_digits < min_handle_len".into());
        }
        if self.n_stems == 0 && self.n_positive > 0 {
            return err("n_stems must be >= 1".into());
        }
        if self.stem_alphabet_size == 0 || self.stem_alphabet_size > LETTERS.len() {
            return err("stem_alphabet_size must be in 1..=26".into());
        }
        if !(self.tweets_mean >= 0.0 && self.tweets_mean.is_finite()) {
            return err("tweets_mean must be finite and >= 0".into());
        }
        for label in [Label::Positive, Label::Negative] {
            let p = self.profile(label);
            let means = [p.followers_mean, p.friends_mean, p.statuses_mean, p.url_rate, p.hashtag_rate];
            if means.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return err("count means and rates must be finite and >= 0".into());
            }
            let probs = [p.p_description, p.p_location, p.p_verified, p.p_geo, p.p_negative_tweet];
            if probs.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return err("probabilities must be in [0, 1]".into());
            }
        }
        Ok(())
    }
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    lexicon: Lexicon,
    positive_words: Vec<String>,
    negative_words: Vec<String>,
    used: HashSet<String>,
}

impl Generator<'_> {
    fn uniform_char(&mut self) -> char {
        HANDLE_ALPHABET[self.rng.random_range(0..HANDLE_ALPHABET.len())] as char
    }

    fn handle_len(&mut self) -> usize {
        self.rng.random_range(self.cfg.min_handle_len..=self.cfg.max_handle_len)
    }

    fn uniform_handle(&mut self) -> String {
        let len = self.handle_len();
        (0..len).map(|_| self.uniform_char()).collect()
    }

    /// Leading digit run followed by letters from a small per-stem alphabet.
    fn stem(&mut self) -> String {
        let len = self.handle_len();
        let digits = self
            .rng
            .random_range(self.cfg.stem_min_digits..=self.cfg.stem_max_digits);
        let mut letters = LETTERS.to_vec();
        letters.shuffle(&mut self.rng);
        letters.truncate(self.cfg.stem_alphabet_size);
        let mut s = String::with_capacity(len);
        for _ in 0..digits {
            s.push(DIGITS[self.rng.random_range(0..DIGITS.len())] as char);
        }
        while s.len() < len {
            s.push(letters[self.rng.random_range(0..letters.len())] as char);
        }
        s
    }

    /// Applies `1 - bias` worth of edits: the length is redrawn with
    /// probability `1 - bias`, then each character is redrawn uniformly with
    /// probability `1 - bias`.
    fn mutate(&mut self, stem: &str) -> String {
        let p_edit = 1.0 - self.cfg.similarity_bias;
        let mut chars: Vec<char> = stem.chars().collect();
        if p_edit > 0.0 && self.rng.random_bool(p_edit) {
            let len = self.handle_len();
            chars.truncate(len);
            while chars.len() < len {
                chars.push(self.uniform_char());
            }
        }
        for c in chars.iter_mut() {
            if p_edit > 0.0 && self.rng.random_bool(p_edit) {
                *c = self.uniform_char();
            }
        }
        chars.into_iter().collect()
    }

    fn unique(&mut self, mut make: impl FnMut(&mut Self) -> String) -> Result<String> {
        for _ in 0..MAX_ATTEMPTS {
            let h = make(self);
            if self.used.insert(h.clone()) {
                return Ok(h);
            }
        }
        Err(Error::Config(
            "could not generate unique handles; raise n_stems, handle length or lower similarity_bias"
                .into(),
        ))
    }

    fn count(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let exp = Exp::new(1.0 / mean).expect("positive rate");
        exp.sample(&mut self.rng).floor() as u64
    }

    fn poisson(&mut self, rate: f64) -> usize {
        if rate <= 0.0 {
            return 0;
        }
        Poisson::new(rate).expect("positive rate").sample(&mut self.rng) as usize
    }

    fn tweet(&mut self, profile: &ClassProfile) -> TweetRecord {
        let mut tokens: Vec<String> = Vec::new();
        for _ in 0..self.rng.random_range(3..=7) {
            tokens.push(FILLER_WORDS[self.rng.random_range(0..FILLER_WORDS.len())].to_string());
        }
        let negative = self.rng.random_bool(profile.p_negative_tweet);
        let (major, minor) = if negative {
            (&self.negative_words, &self.positive_words)
        } else {
            (&self.positive_words, &self.negative_words)
        };
        let mut sentiment = vec![
            major[self.rng.random_range(0..major.len())].clone(),
            major[self.rng.random_range(0..major.len())].clone(),
        ];
        if self.rng.random_bool(0.3) {
            sentiment.push(minor[self.rng.random_range(0..minor.len())].clone());
        }
        tokens.extend(sentiment);
        for _ in 0..self.poisson(profile.hashtag_rate) {
            tokens.push(format!("#{}", FILLER_WORDS[self.rng.random_range(0..FILLER_WORDS.len())]));
        }
        for _ in 0..self.poisson(profile.url_rate) {
            let slug: String = (0..6)
                .map(|_| HANDLE_ALPHABET[self.rng.random_range(0..36)] as char)
                .collect();
            tokens.push(format!("https://t.co/{slug}"));
        }
        tokens.shuffle(&mut self.rng);
        TweetRecord::from_text(tokens.join(" "), &self.lexicon)
    }

    fn account(&mut self, handle: String, class: Label, label: Label) -> AccountRecord {
        let p = self.cfg.profile(class);
        let followers = self.count(p.followers_mean);
        let friends = self.count(p.friends_mean);
        let statuses = self.count(p.statuses_mean);
        let has_description = self.rng.random_bool(p.p_description);
        let has_location = self.rng.random_bool(p.p_location);
        let verified = self.rng.random_bool(p.p_verified);
        let geo_enabled = self.rng.random_bool(p.p_geo);
        let n_tweets = self.poisson(self.cfg.tweets_mean);
        let tweets = (0..n_tweets).map(|_| self.tweet(&p)).collect();
        AccountRecord {
            handle,
            followers,
            friends,
            statuses,
            has_description,
            has_location,
            verified,
            geo_enabled,
            tweets,
            label,
        }
    }
}

/// Generates a corpus. Pure in `(config, seed)`.
pub fn synth_generate(config: &SynthConfig, seed: u64) -> Result<Corpus> {
    config.validate()?;
    let lexicon = Lexicon::bundled();
    let mut positive_words: Vec<String> = lexicon.positive_words().map(str::to_owned).collect();
    let mut negative_words: Vec<String> = lexicon.negative_words().map(str::to_owned).collect();
    positive_words.sort();
    negative_words.sort();
    let mut g = Generator {
        cfg: config,
        rng: ChaCha8Rng::seed_from_u64(seed),
        lexicon,
        positive_words,
        negative_words,
        used: HashSet::new(),
    };

    let mut stems = Vec::with_capacity(config.n_stems);
    let mut stem_set = HashSet::new();
    while stems.len() < config.n_stems {
        let s = g.stem();
        if stem_set.insert(s.clone()) {
            stems.push(s);
        }
    }

    let n_unl_pos = (config.n_unlabeled as f64 * config.unlabeled_positive_fraction).round() as usize;
    let mut records = Vec::with_capacity(config.n_positive + config.n_negative + config.n_unlabeled);
    let mut stem_cursor = 0usize;
    let mut positive = |g: &mut Generator, label: Label| -> Result<AccountRecord> {
        let stem = stems[stem_cursor % stems.len()].clone();
        stem_cursor += 1;
        let handle = g.unique(|g| g.mutate(&stem))?;
        Ok(g.account(handle, Label::Positive, label))
    };
    for _ in 0..config.n_positive {
        records.push(positive(&mut g, Label::Positive)?);
    }
    for _ in 0..config.n_negative {
        let h = g.unique(Generator::uniform_handle)?;
        records.push(g.account(h, Label::Negative, Label::Negative));
    }
    for _ in 0..n_unl_pos {
        records.push(positive(&mut g, Label::Unlabeled)?);
    }
    for _ in n_unl_pos..config.n_unlabeled {
        let h = g.unique(Generator::uniform_handle)?;
        records.push(g.account(h, Label::Negative, Label::Unlabeled));
    }
    records.shuffle(&mut g.rng);
    Ok(Corpus {
        records,
        provenance: Provenance::Synthetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(bias: f64) -> SynthConfig {
        SynthConfig {
            n_positive: 3,
            n_negative: 3,
            n_unlabeled: 0,
            similarity_bias: bias,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn bias_out_of_range_is_config_error() {
        for bias in [-0.1, 1.5, f64::NAN] {
            assert!(matches!(synth_generate(&small(bias), 1), Err(Error::Config(_))));
        }
    }

    #[test]
    fn full_bias_reproduces_stems() {
        let cfg = small(1.0);
        let c = synth_generate(&cfg, 3).unwrap();
        // regenerate the stems with the same RNG stream
        let mut g = Generator {
            cfg: &cfg,
            rng: ChaCha8Rng::seed_from_u64(3),
            lexicon: Lexicon::bundled(),
            positive_words: vec![],
            negative_words: vec![],
            used: HashSet::new(),
        };
        let stems: Vec<String> = (0..cfg.n_stems).map(|_| g.stem()).collect();
        let mut positives = c.handles_with(Label::Positive);
        positives.sort();
        let mut expected: Vec<&str> = stems[..3].iter().map(String::as_str).collect();
        expected.sort();
        assert_eq!(positives, expected);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig {
            n_unlabeled: 50,
            ..small(0.9)
        };
        let a = synth_generate(&cfg, 11).unwrap().to_jsonl_string();
        let b = synth_generate(&cfg, 11).unwrap().to_jsonl_string();
        let c = synth_generate(&cfg, 12).unwrap().to_jsonl_string();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn default_shape_and_validity() {
        let c = synth_generate(&SynthConfig::default(), 0).unwrap();
        assert_eq!(c.count(Label::Positive), 150);
        assert_eq!(c.count(Label::Negative), 150);
        assert_eq!(c.count(Label::Unlabeled), 3000);
        // validates every record and uniqueness
        Corpus::new(c.records, Provenance::Synthetic).unwrap();
    }

    #[test]
    fn config_file_round_trip() {
        let cfg = SynthConfig::from_toml_str("n_positive = 7\nsimilarity_bias = 0.5\n").unwrap();
        assert_eq!(cfg.n_positive, 7);
        assert_eq!(cfg.n_negative, 150);
        assert_eq!(SynthConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
        assert!(SynthConfig::from_toml_str("bogus_key = 1\n").is_err());
        assert!(SynthConfig::from_toml_str("similarity_bias = 2.0\n").is_err());
    }
}
