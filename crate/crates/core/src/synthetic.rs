//! Seeded synthetic three-class corpora for end-to-end checks.
//!
//! Words are consonant-vowel pseudo-words with distinct consonant skeletons,
//! so spelling normalization never merges two of them. Each class owns a
//! block of indicative words; the rest of the vocabulary is shared noise.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, LangTag, Sentiment, Split, TaggedToken, Tweet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    pub vocab_size: usize,
    /// Indicative words per class; the remaining words are noise.
    pub words_per_class: usize,
    /// Probability that a token is indicative of the document's class.
    pub signal: f64,
    /// Probability that a token is indicative of a different class.
    pub confusion: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_train: 600,
            n_validation: 150,
            n_test: 150,
            vocab_size: 50,
            words_per_class: 10,
            signal: 0.45,
            confusion: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub vocabulary: Vec<String>,
    pub train: Corpus,
    pub validation: Corpus,
    pub test: Corpus,
}

const CONSONANTS: &[u8] = b"bdfghklmnprstv";
const VOWELS: &[u8] = b"aeio";
const FINAL_VOWELS: &[u8] = b"aio";

/// `size` distinct six-letter pseudo-words.
pub fn pseudo_words(size: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut skeletons = BTreeSet::new();
    let mut words = Vec::with_capacity(size);
    let max = CONSONANTS.len().pow(3);
    while words.len() < size.min(max) {
        let sk: [u8; 3] = std::array::from_fn(|_| CONSONANTS[rng.gen_range(0..CONSONANTS.len())]);
        if sk[0] == sk[1] || sk[1] == sk[2] || !skeletons.insert(sk) {
            continue;
        }
        let v1 = VOWELS[rng.gen_range(0..VOWELS.len())];
        let v2 = VOWELS[rng.gen_range(0..VOWELS.len())];
        let v3 = FINAL_VOWELS[rng.gen_range(0..FINAL_VOWELS.len())];
        let w = [sk[0], v1, sk[1], v2, sk[2], v3];
        words.push(String::from_utf8(w.to_vec()).expect("ascii"));
    }
    words
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if cfg.words_per_class * 3 > cfg.vocab_size || cfg.words_per_class == 0 {
        return Err(Error::Config(format!(
            "{} indicative words per class do not fit a {}-word vocabulary",
            cfg.words_per_class, cfg.vocab_size
        )));
    }
    if !(0.0..=1.0).contains(&(cfg.signal + cfg.confusion)) || cfg.signal < 0.0 || cfg.confusion < 0.0 {
        return Err(Error::Config("signal and confusion must be probabilities summing to at most 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocabulary = pseudo_words(cfg.vocab_size, &mut rng);
    let k = cfg.words_per_class;
    let class_words = |c: usize| &vocabulary[c * k..(c + 1) * k];
    let noise = &vocabulary[3 * k..];

    let mut make_split = |split: Split, n: usize, prefix: &str| {
        let mut labels: Vec<Sentiment> = (0..n).map(|i| Sentiment::ALL[i % 3]).collect();
        labels.shuffle(&mut rng);
        let tweets = labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| {
                let c = label.index();
                let len = rng.gen_range(8..=14);
                let mut tokens = Vec::with_capacity(len + 2);
                if rng.gen_bool(0.3) {
                    tokens.push(TaggedToken::new("@user", LangTag::Other));
                }
                for _ in 0..len {
                    let roll: f64 = rng.gen();
                    let block = if roll < cfg.signal {
                        class_words(c)
                    } else if roll < cfg.signal + cfg.confusion {
                        class_words((c + rng.gen_range(1..3)) % 3)
                    } else if noise.is_empty() {
                        class_words(c)
                    } else {
                        noise
                    };
                    let word = block.choose(&mut rng);
                    tokens.push(TaggedToken::new(word.expect("non-empty block").clone(), LangTag::Hin));
                }
                if rng.gen_bool(0.2) {
                    tokens.push(TaggedToken::new("!!", LangTag::Other));
                }
                Tweet {
                    uid: format!("{prefix}{i:05}"),
                    tokens,
                    label: Some(label),
                }
            })
            .collect();
        Corpus { split, tweets }
    };
    let train = make_split(Split::Train, cfg.n_train, "tr");
    let validation = make_split(Split::Validation, cfg.n_validation, "va");
    let test = make_split(Split::Test, cfg.n_test, "te");
    Ok(SyntheticCorpus {
        vocabulary,
        train,
        validation,
        test,
    })
}

impl SyntheticCorpus {
    /// Writes `train.txt`, `validation.txt` and `test.txt` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, corpus) in [("train.txt", &self.train), ("validation.txt", &self.validation), ("test.txt", &self.test)] {
            let path = dir.join(name);
            std::fs::write(&path, corpus.to_corpus_string()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
