//! Word n-grams and the count / one-hot / tf-idf vectorizers.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the minimum-frequency threshold counts an n-gram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyMode {
    /// Number of documents containing the n-gram.
    #[default]
    Document,
    /// Total occurrences across the corpus.
    Corpus,
}

impl FromStr for FrequencyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "document" | "df" => Ok(FrequencyMode::Document),
            "corpus" | "total" => Ok(FrequencyMode::Corpus),
            _ => Err(format!("unknown frequency mode {s:?} (expected document or corpus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NGramConfig {
    pub n_low: usize,
    pub n_high: usize,
    pub min_df: usize,
    #[serde(default)]
    pub freq_mode: FrequencyMode,
}

impl NGramConfig {
    pub fn new(n_low: usize, n_high: usize, min_df: usize) -> Result<Self> {
        let cfg = NGramConfig {
            n_low,
            n_high,
            min_df,
            freq_mode: FrequencyMode::Document,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn unigrams() -> Self {
        NGramConfig {
            n_low: 1,
            n_high: 1,
            min_df: 1,
            freq_mode: FrequencyMode::Document,
        }
    }

    pub fn with_min_df(mut self, min_df: usize) -> Self {
        self.min_df = min_df;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.n_low && self.n_low <= self.n_high && self.n_high <= 3) {
            return Err(Error::Config(format!(
                "n-gram range ({}, {}) must satisfy 1 <= low <= high <= 3",
                self.n_low, self.n_high
            )));
        }
        if self.min_df == 0 {
            return Err(Error::Config("minimum frequency must be at least 1".into()));
        }
        Ok(())
    }

    /// Short label used in tables: `uni`, `bi`, `uni-bi`, `uni-bi-tri`, ...
    pub fn range_label(&self) -> String {
        const NAMES: [&str; 3] = ["uni", "bi", "tri"];
        (self.n_low..=self.n_high)
            .map(|n| NAMES[n - 1])
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// All contiguous n-token windows for each n in `[n_low, n_high]`, joined by single spaces.
pub fn extract_ngrams(tokens: &[String], config: &NGramConfig) -> Vec<String> {
    let mut out = Vec::new();
    for n in config.n_low..=config.n_high {
        if n == 0 || n > tokens.len() {
            continue;
        }
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// N-gram → column index; columns follow lexicographic n-gram order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_sorted_terms(terms: Vec<String>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, index }
    }

    fn rebuild_index(&mut self) {
        self.index = self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, idx: usize) -> Option<&str> {
        self.terms.get(idx).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Keeps n-grams whose frequency (document or corpus, per `config.freq_mode`) reaches `min_df`.
pub fn fit_vocabulary(docs: &[Vec<String>], config: &NGramConfig) -> Vocabulary {
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let grams = extract_ngrams(doc, config);
        match config.freq_mode {
            FrequencyMode::Document => {
                let unique: HashSet<String> = grams.into_iter().collect();
                for g in unique {
                    *freq.entry(g).or_insert(0) += 1;
                }
            }
            FrequencyMode::Corpus => {
                for g in grams {
                    *freq.entry(g).or_insert(0) += 1;
                }
            }
        }
    }
    let terms = freq
        .into_iter()
        .filter(|&(_, f)| f >= config.min_df)
        .map(|(t, _)| t)
        .collect();
    Vocabulary::from_sorted_terms(terms)
}

/// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
pub fn fit_idf(docs: &[Vec<String>], vocab: &Vocabulary, config: &NGramConfig) -> Vec<f64> {
    let mut df = vec![0usize; vocab.len()];
    for doc in docs {
        let cols: HashSet<usize> = extract_ngrams(doc, config)
            .iter()
            .filter_map(|g| vocab.get(g))
            .collect();
        for c in cols {
            df[c] += 1;
        }
    }
    let n = docs.len() as f64;
    df.into_iter()
        .map(|d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect()
}

/// Sorted sparse row. Column indices strictly increase and no stored value is zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    /// Builds from arbitrary (index, value) pairs; duplicates are summed and zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut v = SparseVector::default();
        for (i, x) in pairs {
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().unwrap() += x;
            } else {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        let (indices, values): (Vec<u32>, Vec<f64>) = v
            .indices
            .into_iter()
            .zip(v.values)
            .filter(|&(_, x)| x != 0.0)
            .unzip();
        SparseVector { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn get(&self, col: usize) -> f64 {
        match self.indices.binary_search(&(col as u32)) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, x)| x * dense[i]).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn scale(&self, factor: f64) -> SparseVector {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn to_dense(&self, n_cols: usize) -> Vec<f64> {
        let mut d = vec![0.0; n_cols];
        for (i, x) in self.iter() {
            d[i] = x;
        }
        d
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub rows: Vec<SparseVector>,
    pub n_cols: usize,
}

impl DocTermMatrix {
    pub fn new(rows: Vec<SparseVector>, n_cols: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.indices.last().is_none_or(|&i| (i as usize) < n_cols)));
        DocTermMatrix { rows, n_cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVector::nnz).sum()
    }

    pub fn has_negative(&self) -> bool {
        self.rows.iter().flat_map(|r| &r.values).any(|&x| x < 0.0)
    }

    /// Column-major copy of the matrix.
    pub fn to_columns(&self) -> ColumnMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for r in &self.rows {
            for &i in &r.indices {
                counts[i as usize + 1] += 1;
            }
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let nnz = counts[self.n_cols];
        let mut rows = vec![0u32; nnz];
        let mut values = vec![0.0; nnz];
        for (ri, r) in self.rows.iter().enumerate() {
            for (c, x) in r.iter() {
                let pos = next[c];
                rows[pos] = ri as u32;
                values[pos] = x;
                next[c] += 1;
            }
        }
        ColumnMatrix {
            col_ptr: counts,
            rows,
            values,
        }
    }
}

/// Compressed sparse columns; rows within a column are ascending.
#[derive(Debug, Clone)]
pub struct ColumnMatrix {
    pub col_ptr: Vec<usize>,
    pub rows: Vec<u32>,
    pub values: Vec<f64>,
}

impl ColumnMatrix {
    pub fn column(&self, c: usize) -> (&[u32], &[f64]) {
        let (s, e) = (self.col_ptr[c], self.col_ptr[c + 1]);
        (&self.rows[s..e], &self.values[s..e])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizerKind {
    Count,
    OneHot,
    Tfidf,
}

impl VectorizerKind {
    pub const ALL: [VectorizerKind; 3] = [VectorizerKind::Count, VectorizerKind::OneHot, VectorizerKind::Tfidf];

    pub fn as_str(self) -> &'static str {
        match self {
            VectorizerKind::Count => "count",
            VectorizerKind::OneHot => "onehot",
            VectorizerKind::Tfidf => "tfidf",
        }
    }
}

impl fmt::Display for VectorizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VectorizerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "count" => Ok(VectorizerKind::Count),
            "onehot" | "binary" => Ok(VectorizerKind::OneHot),
            "tfidf" => Ok(VectorizerKind::Tfidf),
            _ => Err(format!("unknown vectorizer {s:?} (expected count, onehot or tfidf)")),
        }
    }
}

pub const VECTORIZER_FORMAT: &str = "codemix-vectorizer";
pub const VECTORIZER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedVectorizer {
    pub kind: VectorizerKind,
    pub config: NGramConfig,
    pub vocab: Vocabulary,
    /// Present exactly when `kind` is tf-idf.
    pub idf: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct VectorizerFile {
    format: String,
    version: u32,
    vectorizer: FittedVectorizer,
}

impl FittedVectorizer {
    pub fn fit(kind: VectorizerKind, docs: &[Vec<String>], config: NGramConfig) -> Result<Self> {
        config.validate()?;
        let vocab = fit_vocabulary(docs, &config);
        let idf = (kind == VectorizerKind::Tfidf).then(|| fit_idf(docs, &vocab, &config));
        Ok(FittedVectorizer {
            kind,
            config,
            vocab,
            idf,
        })
    }

    pub fn n_features(&self) -> usize {
        self.vocab.len()
    }

    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for g in extract_ngrams(tokens, &self.config) {
            if let Some(c) = self.vocab.get(&g) {
                *counts.entry(c).or_insert(0.0) += 1.0;
            }
        }
        let mut pairs: Vec<(u32, f64)> = counts.into_iter().map(|(c, x)| (c as u32, x)).collect();
        pairs.sort_by_key(|&(c, _)| c);
        match self.kind {
            VectorizerKind::Count => {}
            VectorizerKind::OneHot => pairs.iter_mut().for_each(|p| p.1 = 1.0),
            VectorizerKind::Tfidf => {
                let idf = self.idf.as_ref().expect("tf-idf vectorizer carries idf");
                for p in pairs.iter_mut() {
                    p.1 *= idf[p.0 as usize];
                }
                let norm = pairs.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt();
                if norm > 0.0 {
                    pairs.iter_mut().for_each(|p| p.1 /= norm);
                }
            }
        }
        let (indices, values) = pairs.into_iter().unzip();
        SparseVector { indices, values }
    }

    pub fn transform_all(&self, docs: &[Vec<String>]) -> DocTermMatrix {
        let rows = docs.par_iter().map(|d| self.transform(d)).collect();
        DocTermMatrix::new(rows, self.n_features())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&VectorizerFile {
            format: VECTORIZER_FORMAT.into(),
            version: VECTORIZER_VERSION,
            vectorizer: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: VectorizerFile = serde_json::from_str(text)?;
        if file.format != VECTORIZER_FORMAT || file.version != VECTORIZER_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported vectorizer file {} v{}",
                file.format, file.version
            )));
        }
        let mut v = file.vectorizer;
        v.vocab.rebuild_index();
        if v.idf.is_some() != (v.kind == VectorizerKind::Tfidf) {
            return Err(Error::InvalidInput("idf weights must be present exactly for tf-idf".into()));
        }
        Ok(v)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
