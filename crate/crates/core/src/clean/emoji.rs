use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Word dropped from every converted emoji phrase.
pub const EMOJI_STOPWORD: &str = "face";

/// Emoji code-point sequence → lowercase word phrase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, String>", into = "BTreeMap<String, String>")]
pub struct EmojiMap {
    entries: BTreeMap<String, String>,
    longest: usize,
}

impl From<BTreeMap<String, String>> for EmojiMap {
    fn from(entries: BTreeMap<String, String>) -> Self {
        let longest = entries.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        EmojiMap { entries, longest }
    }
}

impl From<EmojiMap> for BTreeMap<String, String> {
    fn from(map: EmojiMap) -> Self {
        map.entries
    }
}

impl EmojiMap {
    /// Parses `<emoji><TAB><phrase>` lines. Underscores in phrases count as spaces.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = EmojiMap::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((emoji, phrase)) = line.split_once('\t') else {
                return Err(Error::Format {
                    line: i + 1,
                    message: "emoji map line needs <emoji><TAB><phrase>".into(),
                });
            };
            let phrase = phrase.trim().replace('_', " ").to_lowercase();
            if !phrase.chars().all(|c| c.is_ascii_lowercase() || c == ' ') {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("emoji phrase {phrase:?} must contain only ASCII letters and spaces"),
                });
            }
            let emoji = emoji.trim();
            if emoji.is_empty() || emoji.chars().any(|c| c.is_ascii_alphanumeric() || c.is_whitespace()) {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("emoji key {emoji:?} must be non-empty and free of ASCII letters, digits and spaces"),
                });
            }
            map.insert(emoji, &phrase);
        }
        Ok(map)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, emoji: &str, phrase: &str) {
        if emoji.is_empty() {
            return;
        }
        self.longest = self.longest.max(emoji.chars().count());
        self.entries.insert(emoji.to_string(), phrase.to_string());
    }

    pub fn get(&self, emoji: &str) -> Option<&str> {
        self.entries.get(emoji).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_lines(&self) -> String {
        self.entries.iter().map(|(e, p)| format!("{e}\t{p}\n")).collect()
    }

    /// Longest mapped sequence starting at `chars[at]`, as (length in chars, phrase).
    pub(crate) fn match_at(&self, chars: &[char], at: usize) -> Option<(usize, &str)> {
        let max = self.longest.min(chars.len() - at);
        let mut key = String::new();
        let mut best = None;
        for (len, c) in chars[at..at + max].iter().enumerate() {
            key.push(*c);
            if let Some(p) = self.entries.get(&key) {
                best = Some((len + 1, p.as_str()));
            }
        }
        best
    }
}

/// Phrase with the emoji stopword removed, padded with single spaces.
pub(crate) fn replacement_phrase(phrase: &str) -> String {
    let words: Vec<&str> = phrase
        .split_whitespace()
        .filter(|w| *w != EMOJI_STOPWORD)
        .collect();
    format!(" {} ", words.join(" "))
}

/// Replaces every mapped emoji by its phrase (without the word `face`).
/// Unmapped characters pass through untouched.
pub fn demojize(text: &str, map: &EmojiMap) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        match map.match_at(&chars, i) {
            Some((len, phrase)) => {
                out.push_str(&replacement_phrase(phrase));
                i += len;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmojiMap {
        EmojiMap::parse("😂\tface_with_tears_of_joy\n❤\tred heart\n❤\u{FE0F}\tred heart\n👍\tthumbs up\n").unwrap()
    }

    fn squash(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn converts_and_drops_face() {
        let m = sample();
        assert_eq!(squash(&demojize("😂", &m)), "with tears of joy");
        assert_eq!(squash(&demojize("❤", &m)), "red heart");
        assert_eq!(squash(&demojize("ok", &m)), "ok");
        assert_eq!(squash(&demojize("mast👍👍", &m)), "mast thumbs up thumbs up");
    }

    #[test]
    fn longest_sequence_wins() {
        let m = sample();
        assert_eq!(demojize("❤\u{FE0F}", &m), " red heart ");
    }

    #[test]
    fn unmapped_emoji_pass_through() {
        assert_eq!(demojize("a🦄b", &sample()), "a🦄b");
    }

    #[test]
    fn rejects_bad_phrases() {
        assert!(EmojiMap::parse("😂\tface 2 joy").is_err());
        assert!(EmojiMap::parse("😂 no tab").is_err());
        assert!(EmojiMap::parse("xd\tlaughing").is_err());
    }
}
