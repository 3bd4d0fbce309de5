//! Token/meta corpus files.
//!
//! A corpus file is tab separated. Each tweet starts with a meta line
//! (`meta<TAB>uid<TAB>sentiment`, or `meta<TAB>uid` in unlabeled test files)
//! followed by one `surface<TAB>langtag` line per token.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentiment polarity. The discriminant doubles as the class index used by every model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative = 0,
    Neutral = 1,
    Positive = 2,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];
    pub const COUNT: usize = 3;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Sentiment> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            "positive" => Ok(Sentiment::Positive),
            _ => Err(format!("unrecognized sentiment {s:?}")),
        }
    }
}

/// Language tag attached to each token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LangTag {
    Hin,
    Eng,
    Other,
}

impl LangTag {
    pub const ALL: [LangTag; 3] = [LangTag::Hin, LangTag::Eng, LangTag::Other];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Spelling used when writing corpus files.
    pub fn as_str(self) -> &'static str {
        match self {
            LangTag::Hin => "Hin",
            LangTag::Eng => "Eng",
            LangTag::Other => "O",
        }
    }
}

impl fmt::Display for LangTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps raw tag strings to [`LangTag`]. Matching is case-insensitive; anything
/// not listed maps to [`LangTag::Other`].
#[derive(Debug, Clone)]
pub struct TagAliases {
    map: HashMap<String, LangTag>,
}

impl Default for TagAliases {
    fn default() -> Self {
        let mut aliases = TagAliases {
            map: HashMap::new(),
        };
        for alias in ["hin", "hi", "hindi"] {
            aliases.insert(alias, LangTag::Hin);
        }
        for alias in ["eng", "en", "english"] {
            aliases.insert(alias, LangTag::Eng);
        }
        aliases
    }
}

impl TagAliases {
    pub fn insert(&mut self, alias: &str, tag: LangTag) {
        self.map.insert(alias.trim().to_lowercase(), tag);
    }

    pub fn resolve(&self, raw: &str) -> LangTag {
        self.map
            .get(&raw.trim().to_lowercase())
            .copied()
            .unwrap_or(LangTag::Other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: LangTag,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, tag: LangTag) -> Self {
        TaggedToken {
            surface: surface.into(),
            tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub uid: String,
    pub tokens: Vec<TaggedToken>,
    pub label: Option<Sentiment>,
}

impl Tweet {
    /// Wraps already-cleaned tokens back into a tweet. Cleaned tokens carry no
    /// reliable language tag, so every token is tagged [`LangTag::Other`].
    pub fn from_clean_tokens(uid: impl Into<String>, tokens: &[String], label: Option<Sentiment>) -> Self {
        Tweet {
            uid: uid.into(),
            tokens: tokens
                .iter()
                .map(|t| TaggedToken::new(t.clone(), LangTag::Other))
                .collect(),
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    fn requires_labels(self) -> bool {
        !matches!(self, Split::Test)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "valid" | "dev" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split {s:?} (expected train, validation or test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub split: Split,
    pub tweets: Vec<Tweet>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.tweets.iter().all(|t| t.label.is_some())
    }

    /// Labels of every tweet, or an error naming the first unlabeled uid.
    pub fn labels(&self) -> Result<Vec<Sentiment>> {
        self.tweets
            .iter()
            .map(|t| {
                t.label.ok_or_else(|| {
                    Error::InvalidInput(format!("{} tweet {:?} has no label", self.split, t.uid))
                })
            })
            .collect()
    }

    /// Reads, sanitizes and parses a corpus file.
    pub fn read_file(path: impl AsRef<Path>, split: Split) -> Result<Corpus> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = sanitize_raw(&bytes)?;
        parse_corpus(&text, split)
    }

    /// Canonical corpus-file rendering; parses back to an equal corpus.
    pub fn to_corpus_string(&self) -> String {
        let mut out = String::new();
        for tweet in &self.tweets {
            out.push_str("meta\t");
            out.push_str(&tweet.uid);
            if let Some(label) = tweet.label {
                out.push('\t');
                out.push_str(label.as_str());
            }
            out.push('\n');
            for tok in &tweet.tokens {
                out.push_str(&tok.surface);
                out.push('\t');
                out.push_str(tok.tag.as_str());
                out.push('\n');
            }
        }
        out
    }
}

const QUOTES: [char; 5] = ['"', '\u{201C}', '\u{201D}', '\u{201E}', '\u{201F}'];

/// Decodes UTF-8, drops a leading byte-order mark and removes every double-quote
/// character (straight and curly).
pub fn sanitize_raw(raw: &[u8]) -> Result<String> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Decode {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
    Ok(text.chars().filter(|c| !QUOTES.contains(c)).collect())
}

pub fn parse_corpus(text: &str, split: Split) -> Result<Corpus> {
    parse_corpus_with(text, split, &TagAliases::default())
}

pub fn parse_corpus_with(text: &str, split: Split, aliases: &TagAliases) -> Result<Corpus> {
    let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
    let mut tweets: Vec<Tweet> = Vec::new();
    let mut seen = HashSet::new();

    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();

        if fields[0] == "meta" {
            let label = match (fields.len(), split.requires_labels()) {
                (3, _) => Some(fields[2].parse::<Sentiment>().map_err(|_| Error::Sentiment {
                    line: line_no,
                    value: fields[2].to_string(),
                })?),
                (2, false) => None,
                (n, _) => {
                    let expected = if split.requires_labels() { "3" } else { "2 or 3" };
                    return Err(Error::Format {
                        line: line_no,
                        message: format!("meta line has {n} fields, {split} split expects {expected}"),
                    });
                }
            };
            let uid = fields[1].trim();
            if uid.is_empty() {
                return Err(Error::Format {
                    line: line_no,
                    message: "meta line has an empty uid".into(),
                });
            }
            if !seen.insert(uid.to_string()) {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("duplicate uid {uid:?}"),
                });
            }
            tweets.push(Tweet {
                uid: uid.to_string(),
                tokens: Vec::new(),
                label,
            });
            continue;
        }

        let Some(current) = tweets.last_mut() else {
            return Err(Error::Format {
                line: line_no,
                message: "token line before any meta line".into(),
            });
        };
        if fields.len() != 2 {
            return Err(Error::Format {
                line: line_no,
                message: format!("token line has {} fields, expected 2", fields.len()),
            });
        }
        // quote-only tokens are empty after sanitizing
        if fields[0].trim().is_empty() {
            continue;
        }
        current
            .tokens
            .push(TaggedToken::new(fields[0], aliases.resolve(fields[1])));
    }

    Ok(Corpus { split, tweets })
}

/// Token surfaces joined by single spaces.
pub fn consolidate(tweet: &Tweet) -> String {
    let mut out = String::new();
    for (i, tok) in tweet.tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&tok.surface);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_tweets: usize,
    /// Indexed by [`Sentiment::index`].
    pub per_label: [usize; 3],
    pub unlabeled: usize,
    /// Indexed by [`LangTag::index`].
    pub token_count_per_tag: [usize; 3],
    pub unique_words_per_tag: [usize; 3],
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total\t{}", self.total_tweets)?;
        for s in Sentiment::ALL {
            writeln!(f, "{}\t{}", s, self.per_label[s.index()])?;
        }
        if self.unlabeled > 0 {
            writeln!(f, "unlabeled\t{}", self.unlabeled)?;
        }
        for t in LangTag::ALL {
            writeln!(f, "tokens_{}\t{}", t, self.token_count_per_tag[t.index()])?;
        }
        for t in LangTag::ALL {
            writeln!(f, "unique_{}\t{}", t, self.unique_words_per_tag[t.index()])?;
        }
        Ok(())
    }
}

/// Exact counts over raw (case-sensitive) surfaces.
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        total_tweets: corpus.len(),
        ..Default::default()
    };
    let mut unique: [HashSet<&str>; 3] = Default::default();
    for tweet in &corpus.tweets {
        match tweet.label {
            Some(l) => stats.per_label[l.index()] += 1,
            None => stats.unlabeled += 1,
        }
        for tok in &tweet.tokens {
            stats.token_count_per_tag[tok.tag.index()] += 1;
            unique[tok.tag.index()].insert(&tok.surface);
        }
    }
    for (i, set) in unique.iter().enumerate() {
        stats.unique_words_per_tag[i] = set.len();
    }
    stats
}

/// Word occurrence counts. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreqTable {
    counts: BTreeMap<String, u64>,
}

impl FreqTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, word: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(word.to_string()).or_insert(0) += n;
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn words(&self) -> BTreeSet<String> {
        self.counts.keys().cloned().collect()
    }
}

impl<'a> FromIterator<&'a str> for FreqTable {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut table = FreqTable::new();
        for w in iter {
            table.add(w, 1);
        }
        table
    }
}

/// Per-tag occurrence counts for Hindi- and English-tagged surfaces.
pub fn lang_freq_tables(corpus: &Corpus) -> (FreqTable, FreqTable) {
    let mut hin = FreqTable::new();
    let mut eng = FreqTable::new();
    for tok in corpus.tweets.iter().flat_map(|t| &t.tokens) {
        match tok.tag {
            LangTag::Hin => hin.add(&tok.surface, 1),
            LangTag::Eng => eng.add(&tok.surface, 1),
            LangTag::Other => {}
        }
    }
    (hin, eng)
}
