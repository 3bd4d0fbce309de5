//! Word lists and maps shipped with the crate.

use crate::clean::EmojiMap;
use crate::normalize::{parse_curated, CuratedRow, WordSet};

/// Classic 174-word English stopword list.
pub const ENGLISH_STOPWORDS: &str = include_str!("../data/english_stopwords.txt");
/// Emoji → CLDR-style phrase map.
pub const EMOJI_MAP: &str = include_str!("../data/emoji_map.tsv");
/// Short romanized-Hindi words that carry meaning and are kept out of the stopword list.
pub const HINDI_WHITELIST: &str = include_str!("../data/hindi_whitelist.txt");
/// Hand-curated spelling clusters, canonical spelling first.
pub const HINDI_NORMALIZATION_SEED: &str = include_str!("../data/hindi_normalization_seed.tsv");

pub fn english_stopwords() -> WordSet {
    WordSet::parse(ENGLISH_STOPWORDS)
}

pub fn emoji_map() -> EmojiMap {
    EmojiMap::parse(EMOJI_MAP).expect("bundled emoji map is well formed")
}

pub fn hindi_whitelist() -> WordSet {
    WordSet::parse(HINDI_WHITELIST)
}

pub fn normalization_seed() -> Vec<CuratedRow> {
    parse_curated(HINDI_NORMALIZATION_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::NormalizationDictionary;

    #[test]
    fn bundled_resources_load() {
        assert_eq!(english_stopwords().len(), 174);
        assert!(emoji_map().len() > 100);
        // four words are listed twice in the source list
        assert_eq!(HINDI_WHITELIST.lines().count(), 263);
        assert_eq!(hindi_whitelist().len(), 259);
        let dict = NormalizationDictionary::from_curated(&normalization_seed()).unwrap();
        assert_eq!(dict.len(), 37);
        dict.validate().unwrap();
    }
}
