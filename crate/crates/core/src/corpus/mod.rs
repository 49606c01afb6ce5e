//! Account data model, JSON Lines ingestion and synthetic corpora.

mod synth;

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::text::{count_hashtags, count_urls, Lexicon};
use crate::features::{Dataset, FeatureLayout, Samples};

pub use synth::{synth_generate, ClassProfile, SynthConfig};

pub const MAX_HANDLE_LEN: usize = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
    #[default]
    Unlabeled,
}

impl Label {
    pub fn is_labeled(self) -> bool {
        self != Label::Unlabeled
    }

    /// `+1`, `-1`, or `None` for unlabeled.
    pub fn sign(self) -> Option<i8> {
        match self {
            Label::Positive => Some(1),
            Label::Negative => Some(-1),
            Label::Unlabeled => None,
        }
    }

    pub fn from_sign(sign: i8) -> Label {
        if sign > 0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub text: String,
    pub url_count: u64,
    pub hashtag_count: u64,
    #[serde(rename = "sent_pos")]
    pub sentiment_positive: f64,
    #[serde(rename = "sent_neg")]
    pub sentiment_negative: f64,
}

impl TweetRecord {
    /// Builds a tweet from raw text, deriving every count from it.
    pub fn from_text(text: impl Into<String>, lexicon: &Lexicon) -> Self {
        let text = text.into();
        let (pos, neg) = lexicon.score(&text);
        TweetRecord {
            url_count: count_urls(&text),
            hashtag_count: count_hashtags(&text),
            sentiment_positive: pos,
            sentiment_negative: neg,
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountRecord {
    pub handle: String,
    pub followers: u64,
    pub friends: u64,
    pub statuses: u64,
    pub has_description: bool,
    pub has_location: bool,
    pub verified: bool,
    pub geo_enabled: bool,
    pub tweets: Vec<TweetRecord>,
    #[serde(with = "wire_label")]
    pub label: Label,
}

impl AccountRecord {
    /// An account with an empty profile and no tweets.
    pub fn bare(handle: impl Into<String>, label: Label) -> Self {
        AccountRecord {
            handle: handle.into(),
            followers: 0,
            friends: 0,
            statuses: 0,
            has_description: false,
            has_location: false,
            verified: false,
            geo_enabled: false,
            tweets: Vec::new(),
            label,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        validate_handle(&self.handle)?;
        for (i, t) in self.tweets.iter().enumerate() {
            if !(t.sentiment_positive.is_finite() && t.sentiment_positive >= 0.0)
                || !(t.sentiment_negative.is_finite() && t.sentiment_negative >= 0.0)
            {
                return Err(format!("tweet {i}: sentiment scores must be finite and >= 0"));
            }
            if !t.text.is_empty() {
                if t.url_count != count_urls(&t.text) {
                    return Err(format!("tweet {i}: url_count disagrees with text"));
                }
                if t.hashtag_count != count_hashtags(&t.text) {
                    return Err(format!("tweet {i}: hashtag_count disagrees with text"));
                }
            }
        }
        Ok(())
    }
}

pub fn validate_handle(handle: &str) -> std::result::Result<(), String> {
    let n = handle.chars().count();
    if n == 0 {
        return Err("handle is empty".into());
    }
    if n > MAX_HANDLE_LEN {
        return Err(format!("handle longer than {MAX_HANDLE_LEN} characters"));
    }
    if handle.chars().any(char::is_whitespace) {
        return Err(format!("handle {handle:?} contains whitespace"));
    }
    Ok(())
}

/// JSON `"positive" | "negative" | null`.
mod wire_label {
    use super::Label;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &Label, s: S) -> Result<S::Ok, S::Error> {
        match label {
            Label::Positive => s.serialize_str("positive"),
            Label::Negative => s.serialize_str("negative"),
            Label::Unlabeled => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Label, D::Error> {
        #[derive(Deserialize)]
        #[serde(rename_all = "lowercase")]
        enum Wire {
            Positive,
            Negative,
        }
        Ok(match Option::<Wire>::deserialize(d)? {
            Some(Wire::Positive) => Label::Positive,
            Some(Wire::Negative) => Label::Negative,
            None => Label::Unlabeled,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Ingested,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<AccountRecord>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Validates every record and handle uniqueness.
    pub fn new(records: Vec<AccountRecord>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            r.validate().map_err(|message| Error::Validation {
                line: i + 1,
                message,
            })?;
            if !seen.insert(r.handle.as_str()) {
                return Err(Error::DuplicateHandle {
                    handle: r.handle.clone(),
                });
            }
        }
        Ok(Corpus {
            records,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn handles_with(&self, label: Label) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.label == label)
            .map(|r| r.handle.as_str())
            .collect()
    }

    /// One JSON object per line, in record order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_jsonl(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTweet {
    #[serde(default)]
    text: String,
    url_count: Option<i64>,
    hashtag_count: Option<i64>,
    sent_pos: Option<f64>,
    sent_neg: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAccount {
    handle: String,
    followers: i64,
    friends: i64,
    statuses: i64,
    has_description: bool,
    has_location: bool,
    verified: bool,
    geo_enabled: bool,
    #[serde(default)]
    tweets: Vec<RawTweet>,
    #[serde(default, with = "wire_label")]
    label: Label,
}

fn non_negative(name: &str, v: i64) -> std::result::Result<u64, String> {
    u64::try_from(v).map_err(|_| format!("{name} must be >= 0, got {v}"))
}

impl RawAccount {
    /// Missing tweet counts are derived from the text; missing sentiment
    /// scores come from `lexicon`.
    fn into_record(self, lexicon: &Lexicon) -> std::result::Result<AccountRecord, String> {
        let mut tweets = Vec::with_capacity(self.tweets.len());
        for (i, t) in self.tweets.into_iter().enumerate() {
            let url_count = match t.url_count {
                Some(v) => non_negative(&format!("tweet {i} url_count"), v)?,
                None => count_urls(&t.text),
            };
            let hashtag_count = match t.hashtag_count {
                Some(v) => non_negative(&format!("tweet {i} hashtag_count"), v)?,
                None => count_hashtags(&t.text),
            };
            let (lex_pos, lex_neg) = match (t.sent_pos, t.sent_neg) {
                (Some(_), Some(_)) => (0.0, 0.0),
                _ => lexicon.score(&t.text),
            };
            tweets.push(TweetRecord {
                url_count,
                hashtag_count,
                sentiment_positive: t.sent_pos.unwrap_or(lex_pos),
                sentiment_negative: t.sent_neg.unwrap_or(lex_neg),
                text: t.text,
            });
        }
        let record = AccountRecord {
            handle: self.handle,
            followers: non_negative("followers", self.followers)?,
            friends: non_negative("friends", self.friends)?,
            statuses: non_negative("statuses", self.statuses)?,
            has_description: self.has_description,
            has_location: self.has_location,
            verified: self.verified,
            geo_enabled: self.geo_enabled,
            tweets,
            label: self.label,
        };
        record.validate()?;
        Ok(record)
    }
}

/// Parses JSON Lines from a reader. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R, lexicon: &Lexicon) -> Result<Corpus> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawAccount = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let record = raw.into_record(lexicon).map_err(|message| Error::Validation {
            line: line_no,
            message,
        })?;
        if !seen.insert(record.handle.clone()) {
            return Err(Error::DuplicateHandle {
                handle: record.handle,
            });
        }
        records.push(record);
    }
    Ok(Corpus {
        records,
        provenance: Provenance::Ingested,
    })
}

/// Loads a corpus file, scoring unscored tweets with the bundled lexicon.
pub fn load_jsonl(path: &Path) -> Result<Corpus> {
    load_jsonl_with(path, &Lexicon::bundled())
}

pub fn load_jsonl_with(path: &Path, lexicon: &Lexicon) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(file), lexicon)
}

/// Partitions records into labeled and unlabeled pools and featurizes both.
pub fn split_dataset(corpus: &Corpus, layout: FeatureLayout) -> Result<Dataset> {
    let (labeled, unlabeled): (Vec<&AccountRecord>, Vec<&AccountRecord>) =
        corpus.records.iter().partition(|r| r.label.is_labeled());
    if labeled.is_empty() {
        return Err(Error::InvalidInput(
            "corpus has no labeled records; learners cannot be fitted".into(),
        ));
    }
    let labels = labeled.iter().map(|r| r.label.sign().unwrap_or(-1)).collect();
    Ok(Dataset {
        layout,
        labeled: Samples::from_records(&labeled, layout),
        labels,
        unlabeled: Samples::from_records(&unlabeled, layout),
    })
}
