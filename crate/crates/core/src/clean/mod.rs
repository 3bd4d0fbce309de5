//! The five cumulative cleaning stages.
//!
//! | stage | adds                                                                   |
//! |-------|------------------------------------------------------------------------|
//! | I1    | mention, markup and entity removal; non-letters become spaces          |
//! | I2    | link removal; standalone `RT` / `nan` removal                           |
//! | I3    | lowercasing, spelling normalization, English stopwords, Porter stemming |
//! | I4    | Hindi stopword removal                                                 |
//! | I5    | emoji converted to words before everything else                        |

mod emoji;
mod patterns;
mod porter;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use emoji::{demojize, EmojiMap, EMOJI_STOPWORD};
pub use patterns::strip_patterns;
pub use porter::porter_stem;

use crate::corpus::{Corpus, LangTag, Sentiment, TaggedToken, Tweet};
use crate::error::{Error, Result};
use crate::normalize::{NormalizationDictionary, WordSet};
use patterns::TaggedText;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CleanStage {
    I1 = 1,
    I2 = 2,
    I3 = 3,
    I4 = 4,
    I5 = 5,
}

impl CleanStage {
    pub const ALL: [CleanStage; 5] = [CleanStage::I1, CleanStage::I2, CleanStage::I3, CleanStage::I4, CleanStage::I5];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<CleanStage> {
        Self::ALL.get(usize::from(n).wrapping_sub(1)).copied()
    }
}

impl fmt::Display for CleanStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{}", self.number())
    }
}

impl FromStr for CleanStage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let digits = s.trim().trim_start_matches(['I', 'i']);
        digits
            .parse::<u8>()
            .ok()
            .and_then(CleanStage::from_number)
            .ok_or_else(|| format!("unknown cleaning stage {s:?} (expected 1-5)"))
    }
}

/// Stage plus the resources it needs. Resources are shared behind `Arc` so a
/// config can be cloned cheaply across threads.
#[derive(Debug, Clone)]
pub struct CleanConfig {
    pub stage: CleanStage,
    pub norm_dict: Option<Arc<NormalizationDictionary>>,
    pub english_stopwords: Option<Arc<WordSet>>,
    pub hindi_stopwords: Option<Arc<WordSet>>,
    pub emoji_map: Option<Arc<EmojiMap>>,
}

impl CleanConfig {
    /// A config with no resources; valid for stages I1 and I2.
    pub fn new(stage: CleanStage) -> Self {
        CleanConfig {
            stage,
            norm_dict: None,
            english_stopwords: None,
            hindi_stopwords: None,
            emoji_map: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let missing = |what: &str, from: CleanStage| {
            Error::Config(format!("stage {} requires {what} (needed from stage {from})", self.stage))
        };
        if self.stage >= CleanStage::I3 {
            if self.norm_dict.is_none() {
                return Err(missing("a normalization dictionary", CleanStage::I3));
            }
            if self.english_stopwords.is_none() {
                return Err(missing("an English stopword list", CleanStage::I3));
            }
        }
        if self.stage >= CleanStage::I4 && self.hindi_stopwords.is_none() {
            return Err(missing("a Hindi stopword list", CleanStage::I4));
        }
        if self.stage >= CleanStage::I5 && self.emoji_map.is_none() {
            return Err(missing("an emoji map", CleanStage::I5));
        }
        Ok(())
    }
}

fn word_contains(set: &Option<Arc<WordSet>>, word: &str) -> bool {
    set.as_deref().is_some_and(|s| s.contains(word))
}

/// Per-word processing for stage I3 and later. Returns `None` when the word is dropped.
fn process_word(word: &str, tag: Option<LangTag>, config: &CleanConfig) -> Option<String> {
    let dict = config.norm_dict.as_deref().expect("validated");
    let lower = word.to_ascii_lowercase();
    let normalized = dict.normalize(&lower);
    let rewritten = normalized != lower;
    if word_contains(&config.english_stopwords, normalized) {
        return None;
    }
    let mut out = normalized.to_string();
    if tag == Some(LangTag::Eng) && !rewritten {
        out = dict.normalize(&porter_stem(&out)).to_string();
        if word_contains(&config.english_stopwords, &out) {
            return None;
        }
    }
    if config.stage >= CleanStage::I4 && word_contains(&config.hindi_stopwords, &out) {
        return None;
    }
    // lowercasing can expose a `nan` the case-sensitive rule skipped
    if out.is_empty() || out == "nan" {
        return None;
    }
    Some(out)
}

fn clean_pass(tokens: &[TaggedToken], config: &CleanConfig) -> Vec<String> {
    let mut text = TaggedText::from_tokens(tokens);
    if config.stage >= CleanStage::I5 {
        if let Some(map) = config.emoji_map.as_deref() {
            text.demojize(map);
        }
    }
    text.strip_patterns(config.stage);
    let words = text.words();
    if config.stage < CleanStage::I3 {
        return words.into_iter().map(|(w, _)| w).collect();
    }
    words
        .into_iter()
        .filter_map(|(w, tag)| process_word(&w, tag, config))
        .collect()
}

fn untagged(tokens: &[String]) -> Vec<TaggedToken> {
    tokens
        .iter()
        .map(|t| TaggedToken::new(t.clone(), LangTag::Other))
        .collect()
}

/// Cleans one tweet into word tokens.
///
/// The pass is repeated on its own (untagged) output until nothing changes,
/// so the result is a fixpoint: cleaning it again with the same config is a
/// no-op. In practice the second pass already confirms the result.
pub fn clean_tweet(tweet: &Tweet, config: &CleanConfig) -> Result<Vec<String>> {
    config.validate()?;
    Ok(clean_tokens(&tweet.tokens, config))
}

fn clean_tokens(tokens: &[TaggedToken], config: &CleanConfig) -> Vec<String> {
    let mut out = clean_pass(tokens, config);
    loop {
        let next = clean_pass(&untagged(&out), config);
        if next == out {
            return out;
        }
        out = next;
    }
}

/// A corpus after cleaning: one token list per tweet, in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedCorpus {
    pub uids: Vec<String>,
    pub docs: Vec<Vec<String>>,
    pub labels: Vec<Option<Sentiment>>,
    /// Tweets that cleaned to no tokens; they stay in `docs` as empty documents.
    pub empty_docs: usize,
}

impl CleanedCorpus {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Distinct tokens over all documents.
    pub fn vocabulary(&self) -> std::collections::BTreeSet<&str> {
        self.docs.iter().flatten().map(String::as_str).collect()
    }

    /// `uid<TAB>label<TAB>space-joined tokens` per tweet; label is empty when absent.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((uid, label), doc) in self.uids.iter().zip(&self.labels).zip(&self.docs) {
            out.push_str(uid);
            out.push('\t');
            if let Some(l) = label {
                out.push_str(l.as_str());
            }
            out.push('\t');
            out.push_str(&doc.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_tsv`](Self::to_tsv) layout.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut cleaned = CleanedCorpus {
            uids: vec![],
            docs: vec![],
            labels: vec![],
            empty_docs: 0,
        };
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.splitn(3, '\t');
            let (Some(uid), Some(label), Some(doc)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Format {
                    line: i + 1,
                    message: "expected uid<TAB>label<TAB>tokens".into(),
                });
            };
            let label = if label.is_empty() {
                None
            } else {
                Some(label.parse::<Sentiment>().map_err(|_| Error::Sentiment {
                    line: i + 1,
                    value: label.into(),
                })?)
            };
            let doc: Vec<String> = doc.split_whitespace().map(str::to_string).collect();
            if doc.is_empty() {
                cleaned.empty_docs += 1;
            }
            cleaned.uids.push(uid.to_string());
            cleaned.labels.push(label);
            cleaned.docs.push(doc);
        }
        Ok(cleaned)
    }
}

/// Cleans every tweet (in parallel; output order is corpus order).
pub fn clean_corpus(corpus: &Corpus, config: &CleanConfig) -> Result<CleanedCorpus> {
    config.validate()?;
    let docs: Vec<Vec<String>> = corpus
        .tweets
        .par_iter()
        .map(|t| clean_tokens(&t.tokens, config))
        .collect();
    let empty_docs = docs.iter().filter(|d| d.is_empty()).count();
    Ok(CleanedCorpus {
        uids: corpus.tweets.iter().map(|t| t.uid.clone()).collect(),
        labels: corpus.tweets.iter().map(|t| t.label).collect(),
        docs,
        empty_docs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{parse_curated, NormalizationDictionary};

    fn tweet(tokens: &[(&str, LangTag)]) -> Tweet {
        Tweet {
            uid: "t".into(),
            tokens: tokens.iter().map(|&(s, t)| TaggedToken::new(s, t)).collect(),
            label: Some(Sentiment::Neutral),
        }
    }

    fn config(stage: CleanStage) -> CleanConfig {
        let dict = NormalizationDictionary::from_curated(&parse_curated("aacha\tachha\tacha")).unwrap();
        CleanConfig {
            stage,
            norm_dict: Some(Arc::new(dict)),
            english_stopwords: Some(Arc::new(WordSet::parse("the\nis\nwith\nof\n"))),
            hindi_stopwords: Some(Arc::new(WordSet::parse("hai\nko\n"))),
            emoji_map: Some(Arc::new(EmojiMap::parse("😂\tface with tears of joy\n").unwrap())),
        }
    }

    #[test]
    fn stage_one_keeps_case() {
        let t = tweet(&[("@u", LangTag::Other), ("Great!!", LangTag::Eng)]);
        assert_eq!(clean_tweet(&t, &CleanConfig::new(CleanStage::I1)).unwrap(), vec!["Great"]);
    }

    #[test]
    fn stage_three_normalizes() {
        let t = tweet(&[("achha", LangTag::Hin)]);
        assert_eq!(clean_tweet(&t, &config(CleanStage::I3)).unwrap(), vec!["aacha"]);
    }

    #[test]
    fn stage_four_drops_hindi_stopwords() {
        let t = tweet(&[("hai", LangTag::Hin)]);
        assert!(clean_tweet(&t, &config(CleanStage::I4)).unwrap().is_empty());
        assert_eq!(clean_tweet(&t, &config(CleanStage::I3)).unwrap(), vec!["hai"]);
    }

    #[test]
    fn stemming_is_gated_by_tag() {
        let t = tweet(&[("Running", LangTag::Eng), ("running", LangTag::Hin), ("the", LangTag::Eng)]);
        assert_eq!(clean_tweet(&t, &config(CleanStage::I3)).unwrap(), vec!["run", "running"]);
    }

    #[test]
    fn dictionary_rewrite_skips_stemming() {
        let dict = NormalizationDictionary::from_curated(&parse_curated("pyaar\tpyaars")).unwrap();
        let mut cfg = config(CleanStage::I3);
        cfg.norm_dict = Some(Arc::new(dict));
        let t = tweet(&[("pyaars", LangTag::Eng)]);
        assert_eq!(clean_tweet(&t, &cfg).unwrap(), vec!["pyaar"]);
    }

    #[test]
    fn stage_five_converts_emoji() {
        let t = tweet(&[("lol", LangTag::Eng), ("😂", LangTag::Other)]);
        assert_eq!(
            clean_tweet(&t, &config(CleanStage::I5)).unwrap(),
            vec!["lol", "tears", "joy"]
        );
        // without conversion the emoji is deleted by the letter filter
        assert_eq!(clean_tweet(&t, &config(CleanStage::I4)).unwrap(), vec!["lol"]);
    }

    #[test]
    fn link_only_tweet_becomes_empty() {
        let t = tweet(&[("https://t.co/abc", LangTag::Other)]);
        let c = Corpus {
            split: crate::corpus::Split::Train,
            tweets: vec![t],
        };
        let cleaned = clean_corpus(&c, &CleanConfig::new(CleanStage::I2)).unwrap();
        assert_eq!(cleaned.empty_docs, 1);
        assert_eq!(cleaned.docs, vec![Vec::<String>::new()]);
    }

    #[test]
    fn missing_resources_are_config_errors() {
        let t = tweet(&[("x", LangTag::Eng)]);
        for stage in [CleanStage::I3, CleanStage::I4, CleanStage::I5] {
            assert!(matches!(clean_tweet(&t, &CleanConfig::new(stage)), Err(Error::Config(_))));
        }
        let mut cfg = config(CleanStage::I5);
        cfg.emoji_map = None;
        assert!(matches!(clean_tweet(&t, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn uppercase_nan_is_dropped_after_lowercasing() {
        let t = tweet(&[("NaN", LangTag::Eng), ("kya", LangTag::Hin)]);
        assert_eq!(clean_tweet(&t, &config(CleanStage::I3)).unwrap(), vec!["kya"]);
        assert_eq!(clean_tweet(&t, &CleanConfig::new(CleanStage::I2)).unwrap(), vec!["NaN", "kya"]);
    }

    #[test]
    fn stage_parsing() {
        assert_eq!("3".parse::<CleanStage>().unwrap(), CleanStage::I3);
        assert_eq!("I5".parse::<CleanStage>().unwrap(), CleanStage::I5);
        assert!("0".parse::<CleanStage>().is_err());
        assert!("6".parse::<CleanStage>().is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let c = CleanedCorpus {
            uids: vec!["1".into(), "2".into()],
            docs: vec![vec!["a".into(), "b".into()], vec![]],
            labels: vec![Some(Sentiment::Positive), None],
            empty_docs: 1,
        };
        assert_eq!(CleanedCorpus::from_tsv(&c.to_tsv()).unwrap(), c);
    }
}
