//! Spelling normalization for romanized Hindi and the derived Hindi stopword list.
//!
//! Variants are grouped under an equivalence key (letter substitutions plus
//! collapsing of repeated letters). Groups whose vowel-elided keys coincide are
//! merged when at least one of them is made of short words, which catches
//! short forms such as `krna` for `karna`. Each cluster's canonical spelling is
//! its most frequent member.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clean::{strip_patterns, CleanStage};
use crate::corpus::{Corpus, FreqTable, LangTag};
use crate::error::{Error, Result};

/// Groups whose members average at most this many letters may merge through the elision key.
pub const SHORT_FORM_MAX_AVG_LEN: f64 = 4.0;

fn substitute(c: char) -> char {
    match c {
        'q' => 'k',
        'z' => 'j',
        'u' => 'o',
        'w' => 'v',
        other => other,
    }
}

/// Letter substitutions `q→k z→j u→o w→v`, then every run of one letter collapsed.
pub fn equiv_key(word: &str) -> String {
    let mut key = String::with_capacity(word.len());
    let mut prev = None;
    for c in word.chars().map(substitute) {
        if prev != Some(c) {
            key.push(c);
            prev = Some(c);
        }
    }
    key
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o')
}

/// [`equiv_key`] with every non-initial vowel removed.
pub fn elision_key(word: &str) -> String {
    equiv_key(word)
        .chars()
        .enumerate()
        .filter(|&(i, c)| i == 0 || !is_vowel(c))
        .map(|(_, c)| c)
        .collect()
}

/// A row of a curated dictionary: the first word is canonical.
pub type CuratedRow = Vec<String>;

/// Parses the curated dictionary layout: tab-separated variants, canonical first.
pub fn parse_curated(text: &str) -> Vec<CuratedRow> {
    text.lines()
        .map(|l| {
            l.split('\t')
                .map(|w| w.trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect::<Vec<_>>()
        })
        .filter(|row| !row.is_empty())
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationDictionary {
    clusters: BTreeMap<String, BTreeSet<String>>,
    lookup: BTreeMap<String, String>,
    /// Canonicals that came from curated rows rather than from frequencies.
    curated: BTreeSet<String>,
}

impl NormalizationDictionary {
    /// A dictionary made only of curated rows.
    pub fn from_curated(rows: &[CuratedRow]) -> Result<Self> {
        let mut dict = NormalizationDictionary::default();
        dict.add_curated(rows)?;
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_curated(&parse_curated(&text))
    }

    fn add_curated(&mut self, rows: &[CuratedRow]) -> Result<()> {
        for row in rows {
            let canonical = &row[0];
            for word in row {
                match self.lookup.get(word) {
                    Some(existing) if existing != canonical => {
                        return Err(Error::CuratedConflict {
                            word: word.clone(),
                            first: existing.clone(),
                            second: canonical.clone(),
                        });
                    }
                    _ => {
                        self.lookup.insert(word.clone(), canonical.clone());
                    }
                }
            }
            self.clusters
                .entry(canonical.clone())
                .or_default()
                .extend(row.iter().cloned());
            self.curated.insert(canonical.clone());
        }
        Ok(())
    }

    /// Canonical spelling of `word`, or `word` itself when unknown.
    pub fn normalize<'a>(&'a self, word: &'a str) -> &'a str {
        self.lookup.get(word).map(String::as_str).unwrap_or(word)
    }

    pub fn canonical_of(&self, word: &str) -> Option<&str> {
        self.lookup.get(word).map(String::as_str)
    }

    pub fn clusters(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.clusters
    }

    pub fn is_curated(&self, canonical: &str) -> bool {
        self.curated.contains(canonical)
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// All words the dictionary knows, variants and canonicals alike.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.lookup.keys().map(String::as_str)
    }

    /// Renders one row per cluster, canonical first, in the curated-file layout.
    pub fn to_rows_string(&self) -> String {
        let mut out = String::new();
        for (canonical, members) in &self.clusters {
            out.push_str(canonical);
            for m in members.iter().filter(|m| *m != canonical) {
                out.push('\t');
                out.push_str(m);
            }
            out.push('\n');
        }
        out
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for (canonical, members) in &self.clusters {
            if !members.contains(canonical) {
                return Err(format!("canonical {canonical:?} missing from its cluster"));
            }
            for m in members {
                if !seen.insert(m) {
                    return Err(format!("{m:?} belongs to two clusters"));
                }
                if self.lookup.get(m) != Some(canonical) {
                    return Err(format!("lookup of {m:?} does not point to {canonical:?}"));
                }
            }
        }
        if seen.len() != self.lookup.len() {
            return Err("lookup has entries outside every cluster".into());
        }
        Ok(())
    }
}

/// Union-find over group indices.
struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

fn pick_canonical<'a>(members: impl Iterator<Item = &'a String>, freq: &FreqTable) -> String {
    // BTreeSet iteration is ascending, so the first maximum is the lexicographically smallest.
    let mut best: Option<(&String, u64)> = None;
    for m in members {
        let f = freq.get(m);
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((m, f));
        }
    }
    best.map(|(w, _)| w.clone()).unwrap_or_default()
}

/// Builds the dictionary from word frequencies, then lets curated rows override
/// any word they mention.
pub fn build_norm_dict(freq: &FreqTable, curated: Option<&[CuratedRow]>) -> Result<NormalizationDictionary> {
    if freq.is_empty() {
        return Err(Error::InvalidInput("frequency table is empty".into()));
    }

    let curated_words: BTreeSet<&str> = curated
        .unwrap_or_default()
        .iter()
        .flatten()
        .map(String::as_str)
        .collect();

    // (1) equivalence-key groups
    let mut by_key: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (word, _) in freq.iter() {
        if word.is_empty() || curated_words.contains(word) {
            continue;
        }
        by_key.entry(equiv_key(word)).or_default().insert(word.to_string());
    }
    let groups: Vec<BTreeSet<String>> = by_key.into_values().collect();

    // (2) elision merge: within one elision bucket, every group merges with any short group.
    let mut buckets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        let any = g.iter().next().expect("groups are non-empty");
        buckets.entry(elision_key(any)).or_default().push(i);
    }
    let mut sets = DisjointSets::new(groups.len());
    for members in buckets.values() {
        let short: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| {
                let g = &groups[i];
                let letters: usize = g.iter().map(|w| w.chars().count()).sum();
                letters as f64 / g.len() as f64 <= SHORT_FORM_MAX_AVG_LEN
            })
            .collect();
        if let Some(&anchor) = short.first() {
            for &i in members {
                sets.union(anchor, i);
            }
        }
    }
    let mut merged: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (i, g) in groups.into_iter().enumerate() {
        merged.entry(sets.find(i)).or_default().extend(g);
    }

    // (3) canonical by frequency
    let mut dict = NormalizationDictionary::default();
    for members in merged.into_values() {
        let canonical = pick_canonical(members.iter(), freq);
        for m in &members {
            dict.lookup.insert(m.clone(), canonical.clone());
        }
        dict.clusters.insert(canonical, members);
    }

    // (4) curated rows
    if let Some(rows) = curated {
        dict.add_curated(rows)?;
    }
    Ok(dict)
}

/// `lookup(word)` if present, else `word`.
pub fn normalize_token(word: &str, dict: &NormalizationDictionary) -> String {
    dict.normalize(word).to_string()
}

/// A set of lowercase words, one per line on disk.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSet {
    words: BTreeSet<String>,
}

/// Hindi stopwords.
pub type StopwordList = WordSet;
/// Short words that carry meaning and must not become stopwords.
pub type Whitelist = WordSet;

impl WordSet {
    pub fn parse(text: &str) -> Self {
        text.lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            let _ = writeln!(out, "{w}");
        }
        out
    }
}

impl FromIterator<String> for WordSet {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        WordSet {
            words: iter.into_iter().collect(),
        }
    }
}

/// Frequencies of Hindi-tagged words after the stage-2 stripping rules and lowercasing.
pub fn hindi_word_frequencies(corpus: &Corpus) -> FreqTable {
    let mut freq = FreqTable::new();
    for tok in corpus.tweets.iter().flat_map(|t| &t.tokens) {
        if tok.tag != LangTag::Hin {
            continue;
        }
        for w in strip_patterns(&tok.surface, CleanStage::I2).split_whitespace() {
            freq.add(&w.to_ascii_lowercase(), 1);
        }
    }
    freq
}

/// Words of one to three letters, minus the whitelist.
pub fn derive_stopwords<'a>(vocab: impl IntoIterator<Item = &'a str>, whitelist: &Whitelist) -> StopwordList {
    vocab
        .into_iter()
        .filter(|w| (1..=3).contains(&w.chars().count()) && !whitelist.contains(w))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freq(pairs: &[(&str, u64)]) -> FreqTable {
        let mut f = FreqTable::new();
        for &(w, c) in pairs {
            f.add(w, c);
        }
        f
    }

    #[test]
    fn equiv_key_examples() {
        assert_eq!(equiv_key("aaag"), "ag");
        assert_eq!(equiv_key("wada"), "vada");
        assert_eq!(equiv_key("vada"), "vada");
        assert_eq!(equiv_key("cat"), "cat");
        assert_eq!(equiv_key("qubool"), "kobol");
        assert_eq!(equiv_key("kabool"), "kabol");
    }

    #[test]
    fn elision_key_examples() {
        assert_eq!(elision_key("karna"), "krn");
        assert_eq!(elision_key("krna"), "krn");
        assert_eq!(elision_key("mujhe"), "mjh");
        assert_eq!(elision_key("mjhe"), "mjh");
        assert_eq!(elision_key("brt"), "brt");
        assert_eq!(elision_key("acha"), "ach");
    }

    #[test]
    fn acha_variants_cluster_by_frequency() {
        let d = build_norm_dict(&freq(&[("acha", 50), ("accha", 20), ("achha", 10)]), None).unwrap();
        assert_eq!(d.len(), 1);
        for w in ["acha", "accha", "achha"] {
            assert_eq!(d.normalize(w), "acha");
        }
        d.validate().unwrap();
    }

    #[test]
    fn singleton_cluster() {
        let d = build_norm_dict(&freq(&[("xyz", 1)]), None).unwrap();
        assert_eq!(d.normalize("xyz"), "xyz");
        assert_eq!(d.clusters()["xyz"].len(), 1);
    }

    #[test]
    fn empty_freq_is_an_error() {
        assert!(build_norm_dict(&FreqTable::new(), None).is_err());
    }

    #[test]
    fn repeated_letters_cluster() {
        let d = build_norm_dict(
            &freq(&[("aaag", 1), ("aag", 3), ("ag", 7), ("agg", 2), ("aggg", 1)]),
            None,
        )
        .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.clusters()["ag"].len(), 5);
    }

    #[test]
    fn short_forms_merge_via_elision() {
        let d = build_norm_dict(&freq(&[("karna", 9), ("krna", 4), ("mujhe", 5), ("mjhe", 2)]), None).unwrap();
        assert_eq!(d.normalize("krna"), "karna");
        assert_eq!(d.normalize("mjhe"), "mujhe");
        // two long groups with the same elision key stay apart
        let d = build_norm_dict(&freq(&[("bharat", 5), ("bhrata", 1)]), None).unwrap();
        assert_eq!(elision_key("bharat"), elision_key("bhrata"));
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn tie_breaks_lexicographically() {
        let d = build_norm_dict(&freq(&[("kya", 3), ("kyaa", 3), ("qya", 3)]), None).unwrap();
        assert_eq!(d.normalize("qya"), "kya");
    }

    #[test]
    fn curated_rows_override() {
        let rows = parse_curated("aacha\tacaha\taccha\tacha\tachha\n");
        let d = build_norm_dict(&freq(&[("acha", 50), ("accha", 20), ("achha", 10), ("achaa", 2)]), Some(&rows)).unwrap();
        assert_eq!(d.normalize("achha"), "aacha");
        assert_eq!(d.normalize("acha"), "aacha");
        assert_eq!(d.normalize("aacha"), "aacha");
        // achaa is not curated, stays algorithmic
        assert_eq!(d.normalize("achaa"), "achaa");
        assert!(d.is_curated("aacha"));
        d.validate().unwrap();
    }

    #[test]
    fn curated_conflict_names_word() {
        let rows = parse_curated("abhi\tabhai\nab\tabhai\n");
        match NormalizationDictionary::from_curated(&rows) {
            Err(Error::CuratedConflict { word, .. }) => assert_eq!(word, "abhai"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn curated_duplicates_within_row_are_fine() {
        let rows = parse_curated("aaana\taana\tana\tanna\tanna\tanna\n");
        let d = NormalizationDictionary::from_curated(&rows).unwrap();
        assert_eq!(d.clusters()["aaana"].len(), 4);
    }

    #[test]
    fn normalize_token_unknown_and_fixed_points() {
        let d = NormalizationDictionary::from_curated(&parse_curated("aacha\tachha")).unwrap();
        assert_eq!(normalize_token("achha", &d), "aacha");
        assert_eq!(normalize_token("aacha", &d), "aacha");
        assert_eq!(normalize_token("zebra", &d), "zebra");
    }

    #[test]
    fn stopwords_by_length() {
        let wl: Whitelist = ["nai".to_string()].into_iter().collect();
        let sw = derive_stopwords(["hai", "ka", "nai", "bahut", "x"], &wl);
        assert_eq!(sw.iter().collect::<Vec<_>>(), vec!["hai", "ka", "x"]);
        assert!(derive_stopwords(["abcd", "efgh"], &wl).is_empty());
    }
}
