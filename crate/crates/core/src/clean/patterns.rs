//! Regex stripping rules applied to consolidated tweet text.
//!
//! The rules run on text whose characters remember the language tag of the
//! token they came from, so that words surviving the rules can still be
//! stemmed by tag.

use std::sync::LazyLock;

use regex::{Captures, Regex};

use super::emoji::{replacement_phrase, EmojiMap};
use super::CleanStage;
use crate::corpus::{LangTag, TaggedToken};

static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[A-Za-z0-9_']+").unwrap());
static MARKUP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)<!--.*?-->|</?[A-Za-z][^<>]*>").unwrap());
static ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(#[0-9]{1,7}|#[xX][0-9A-Fa-f]{1,6}|[A-Za-z][A-Za-z0-9]{1,31});").unwrap());
// Scheme followed by `://host/path`, tolerating spaces around the separators
// (tokenized corpora split URLs into several tokens), or scheme glued to URL characters.
static LINK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"https?(?:(?: *:)?(?: */)+ *[A-Za-z0-9_\-]+(?: *[./] *[A-Za-z0-9_\-]+)*/?|[A-Za-z0-9./]*)",
    )
    .unwrap()
});
static RT_NAN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(?:RT|nan)\b").unwrap());

fn named_entity(name: &str) -> Option<char> {
    Some(match name {
        "quot" => '"',
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "apos" => '\'',
        "nbsp" => '\u{A0}',
        "hellip" => '…',
        "ndash" => '–',
        "mdash" => '—',
        "lsquo" => '‘',
        "rsquo" => '’',
        "ldquo" => '“',
        "rdquo" => '”',
        "copy" => '©',
        "reg" => '®',
        "trade" => '™',
        "eacute" => 'é',
        "egrave" => 'è',
        "agrave" => 'à',
        "aacute" => 'á',
        "ntilde" => 'ñ',
        "uuml" => 'ü',
        "ouml" => 'ö',
        "auml" => 'ä',
        _ => return None,
    })
}

fn decode_entity(caps: &Captures) -> String {
    let body = &caps[1];
    let decoded = if let Some(hex) = body.strip_prefix("#x").or_else(|| body.strip_prefix("#X")) {
        u32::from_str_radix(hex, 16).ok().and_then(char::from_u32)
    } else if let Some(dec) = body.strip_prefix('#') {
        dec.parse::<u32>().ok().and_then(char::from_u32)
    } else {
        named_entity(body)
    };
    match decoded {
        Some(c) => c.to_string(),
        None => caps[0].to_string(),
    }
}

/// Characters paired with the tag of the token each came from (`None` for separators).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct TaggedText {
    chars: Vec<char>,
    tags: Vec<Option<LangTag>>,
}

impl TaggedText {
    pub(crate) fn from_tokens(tokens: &[TaggedToken]) -> Self {
        let mut text = TaggedText::default();
        for (i, tok) in tokens.iter().enumerate() {
            if i > 0 {
                text.chars.push(' ');
                text.tags.push(None);
            }
            for c in tok.surface.chars() {
                text.chars.push(c);
                text.tags.push(Some(tok.tag));
            }
        }
        text
    }

    pub(crate) fn from_plain(text: &str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let tags = vec![None; chars.len()];
        TaggedText { chars, tags }
    }

    pub(crate) fn as_string(&self) -> String {
        self.chars.iter().collect()
    }

    /// Rewrites every regex match; replacement characters inherit the tag of
    /// the first character of the match.
    fn rewrite(&mut self, re: &Regex, mut replace: impl FnMut(&Captures) -> String) {
        let s = self.as_string();
        if !re.is_match(&s) {
            return;
        }
        // byte offset -> char index
        let mut char_at = vec![0usize; s.len() + 1];
        for (ci, (bi, _)) in s.char_indices().enumerate() {
            char_at[bi] = ci;
        }
        char_at[s.len()] = self.chars.len();

        let mut chars = Vec::with_capacity(self.chars.len());
        let mut tags = Vec::with_capacity(self.tags.len());
        let mut last = 0;
        for caps in re.captures_iter(&s) {
            let m = caps.get(0).expect("group 0 always matches");
            let (start, end) = (char_at[m.start()], char_at[m.end()]);
            chars.extend_from_slice(&self.chars[last..start]);
            tags.extend_from_slice(&self.tags[last..start]);
            let tag = self.tags.get(start).copied().flatten();
            for c in replace(&caps).chars() {
                chars.push(c);
                tags.push(tag);
            }
            last = end;
        }
        chars.extend_from_slice(&self.chars[last..]);
        tags.extend_from_slice(&self.tags[last..]);
        self.chars = chars;
        self.tags = tags;
    }

    pub(crate) fn demojize(&mut self, map: &EmojiMap) {
        if map.is_empty() {
            return;
        }
        let mut chars = Vec::with_capacity(self.chars.len());
        let mut tags = Vec::with_capacity(self.tags.len());
        let mut i = 0;
        while i < self.chars.len() {
            match map.match_at(&self.chars, i) {
                Some((len, phrase)) => {
                    let tag = self.tags[i];
                    for c in replacement_phrase(phrase).chars() {
                        chars.push(c);
                        tags.push(tag);
                    }
                    i += len;
                }
                None => {
                    chars.push(self.chars[i]);
                    tags.push(self.tags[i]);
                    i += 1;
                }
            }
        }
        self.chars = chars;
        self.tags = tags;
    }

    pub(crate) fn strip_patterns(&mut self, stage: CleanStage) {
        self.rewrite(&MENTION, |_| String::new());
        self.rewrite(&MARKUP, |_| String::new());
        self.rewrite(&ENTITY, decode_entity);
        if stage >= CleanStage::I2 {
            self.rewrite(&LINK, |_| String::new());
        }
        for c in self.chars.iter_mut() {
            if !c.is_ascii_alphabetic() {
                *c = ' ';
            }
        }
        if stage >= CleanStage::I2 {
            self.rewrite(&RT_NAN, |_| String::new());
        }
    }

    /// Whitespace-separated words, each tagged by its first character.
    pub(crate) fn words(&self) -> Vec<(String, Option<LangTag>)> {
        let mut out = Vec::new();
        let mut current = String::new();
        let mut tag = None;
        for (&c, &t) in self.chars.iter().zip(&self.tags) {
            if c.is_whitespace() {
                if !current.is_empty() {
                    out.push((std::mem::take(&mut current), tag));
                }
            } else {
                if current.is_empty() {
                    tag = t;
                }
                current.push(c);
            }
        }
        if !current.is_empty() {
            out.push((current, tag));
        }
        out
    }
}

/// Applies the stripping rules in order: mentions, markup and entities, links
/// (stage 2 and later), non-letters to spaces, then the standalone words `RT`
/// and `nan` (stage 2 and later). Whitespace is not collapsed.
pub fn strip_patterns(text: &str, stage: CleanStage) -> String {
    let mut t = TaggedText::from_plain(text);
    t.strip_patterns(stage);
    t.as_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squash(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn stage_two_example() {
        assert_eq!(squash(&strip_patterns("@RahulG great https://t.co/x RT", CleanStage::I2)), "great");
    }

    #[test]
    fn entities_decode_then_vanish() {
        assert_eq!(squash(&strip_patterns("&quot;wah&quot;", CleanStage::I1)), "wah");
        assert_eq!(squash(&strip_patterns("caf&eacute; &#65;", CleanStage::I1)), "caf A");
        assert_eq!(squash(&strip_patterns("&bogus; x", CleanStage::I1)), "bogus x");
    }

    #[test]
    fn plain_word_untouched() {
        assert_eq!(strip_patterns("hello", CleanStage::I1), "hello");
    }

    #[test]
    fn stage_one_keeps_links_and_rt() {
        assert_eq!(
            squash(&strip_patterns("RT nice https://t.co/x", CleanStage::I1)),
            "RT nice https t co x"
        );
    }

    #[test]
    fn markup_tags_removed() {
        assert_eq!(squash(&strip_patterns("<b>bahut</b> <br/>badiya", CleanStage::I1)), "bahut badiya");
        // a bare comparison is not markup
        assert_eq!(squash(&strip_patterns("a < b > c", CleanStage::I1)), "a b c");
    }

    #[test]
    fn space_broken_links() {
        assert_eq!(squash(&strip_patterns("dekho https : // t . co / Ab12Cd yaar", CleanStage::I2)), "dekho yaar");
        assert_eq!(squash(&strip_patterns("dekho https // t . co / Ab12Cd", CleanStage::I2)), "dekho");
        assert_eq!(squash(&strip_patterns("link httpstcoabc done", CleanStage::I2)), "link done");
        assert_eq!(squash(&strip_patterns("http is down", CleanStage::I2)), "is down");
    }

    #[test]
    fn rt_and_nan_are_case_sensitive_words() {
        assert_eq!(squash(&strip_patterns("RT nan NaN rt ARTS banana", CleanStage::I2)), "NaN rt ARTS banana");
    }

    #[test]
    fn mentions_with_apostrophes() {
        assert_eq!(squash(&strip_patterns("@modi's rally", CleanStage::I1)), "rally");
        assert_eq!(squash(&strip_patterns("hi @ user", CleanStage::I1)), "hi user");
    }

    #[test]
    fn tags_follow_words() {
        let toks = vec![
            TaggedToken::new("@x", LangTag::Other),
            TaggedToken::new("running", LangTag::Eng),
            TaggedToken::new("hai!!", LangTag::Hin),
        ];
        let mut t = TaggedText::from_tokens(&toks);
        t.strip_patterns(CleanStage::I2);
        assert_eq!(
            t.words(),
            vec![("running".to_string(), Some(LangTag::Eng)), ("hai".to_string(), Some(LangTag::Hin))]
        );
    }
}
