//! Resources shared by the cleaning stages, cached cleaned/featurized splits,
//! and a trained end-to-end pipeline that can be saved and applied to raw tweets.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::clean::{clean_corpus, clean_tweet, CleanConfig, CleanStage, CleanedCorpus, EmojiMap};
use crate::corpus::{Corpus, Sentiment, Split, Tweet};
use crate::error::{Error, Result};
use crate::features::{DocTermMatrix, FittedVectorizer, NGramConfig, VectorizerKind};
use crate::models::SavedModel;
use crate::normalize::{
    build_norm_dict, derive_stopwords, hindi_word_frequencies, CuratedRow, NormalizationDictionary, WordSet,
};
use crate::resources;

/// Everything the five cleaning stages need.
#[derive(Debug, Clone)]
pub struct Resources {
    pub norm_dict: Arc<NormalizationDictionary>,
    pub english_stopwords: Arc<WordSet>,
    pub hindi_stopwords: Arc<WordSet>,
    pub emoji_map: Arc<EmojiMap>,
}

impl Resources {
    /// Builds the dictionary from the Hindi-tagged training words (plus curated
    /// rows) and derives Hindi stopwords from the stage-3 training vocabulary.
    /// English stopwords, the emoji map and the whitelist are the bundled ones.
    pub fn derive(train: &Corpus, curated: Option<&[CuratedRow]>) -> Result<Self> {
        let freq = hindi_word_frequencies(train);
        let norm_dict = if freq.is_empty() {
            NormalizationDictionary::from_curated(curated.unwrap_or_default())?
        } else {
            build_norm_dict(&freq, curated)?
        };
        let mut res = Resources {
            norm_dict: Arc::new(norm_dict),
            english_stopwords: Arc::new(resources::english_stopwords()),
            hindi_stopwords: Arc::new(WordSet::default()),
            emoji_map: Arc::new(resources::emoji_map()),
        };
        let i3 = clean_corpus(train, &res.clean_config(CleanStage::I3))?;
        res.hindi_stopwords = Arc::new(derive_stopwords(i3.vocabulary(), &resources::hindi_whitelist()));
        Ok(res)
    }

    /// [`derive`](Self::derive) with the bundled curated spelling clusters.
    pub fn derive_default(train: &Corpus) -> Result<Self> {
        Self::derive(train, Some(&resources::normalization_seed()))
    }

    pub fn clean_config(&self, stage: CleanStage) -> CleanConfig {
        CleanConfig {
            stage,
            norm_dict: Some(self.norm_dict.clone()),
            english_stopwords: Some(self.english_stopwords.clone()),
            hindi_stopwords: Some(self.hindi_stopwords.clone()),
            emoji_map: Some(self.emoji_map.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CleanedSplits {
    pub train: CleanedCorpus,
    pub validation: Option<CleanedCorpus>,
    pub test: Option<CleanedCorpus>,
}

impl CleanedSplits {
    pub fn split(&self, split: Split) -> Option<&CleanedCorpus> {
        match split {
            Split::Train => Some(&self.train),
            Split::Validation => self.validation.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureSplits {
    pub vectorizer: FittedVectorizer,
    pub train: DocTermMatrix,
    pub validation: Option<DocTermMatrix>,
    pub test: Option<DocTermMatrix>,
}

impl FeatureSplits {
    pub fn split(&self, split: Split) -> Option<&DocTermMatrix> {
        match split {
            Split::Train => Some(&self.train),
            Split::Validation => self.validation.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }
}

type FeatureKey = (CleanStage, VectorizerKind, NGramConfig);

/// The three splits plus derived resources, with per-stage and per-feature caches.
#[derive(Debug)]
pub struct ExperimentData {
    pub train: Corpus,
    pub validation: Option<Corpus>,
    pub test: Option<Corpus>,
    pub resources: Resources,
    cleaned: Mutex<HashMap<CleanStage, Arc<CleanedSplits>>>,
    features: Mutex<HashMap<FeatureKey, Arc<FeatureSplits>>>,
}

impl ExperimentData {
    pub fn new(train: Corpus, validation: Option<Corpus>, test: Option<Corpus>, resources: Resources) -> Result<Self> {
        train.labels()?;
        if let Some(v) = &validation {
            v.labels()?;
        }
        Ok(ExperimentData {
            train,
            validation,
            test,
            resources,
            cleaned: Mutex::new(HashMap::new()),
            features: Mutex::new(HashMap::new()),
        })
    }

    /// Loads the splits found in `dir` (see [`DataFiles::discover`]) and derives resources.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let files = DataFiles::discover(dir.as_ref())?;
        let train = read_split(&files.train, Split::Train)?;
        let validation = files.validation.as_deref().map(|p| read_split(p, Split::Validation)).transpose()?;
        let mut test = files.test.as_deref().map(|p| read_split(p, Split::Test)).transpose()?;
        if let (Some(t), Some(lp)) = (test.as_mut(), files.test_labels.as_deref()) {
            attach_labels(t, lp)?;
        }
        let resources = Resources::derive_default(&train)?;
        Self::new(train, validation, test, resources)
    }

    pub fn corpus(&self, split: Split) -> Option<&Corpus> {
        match split {
            Split::Train => Some(&self.train),
            Split::Validation => self.validation.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }

    pub fn cleaned(&self, stage: CleanStage) -> Result<Arc<CleanedSplits>> {
        let mut cache = self.cleaned.lock().expect("cache lock");
        if let Some(c) = cache.get(&stage) {
            return Ok(c.clone());
        }
        let cfg = self.resources.clean_config(stage);
        let clean = |c: &Corpus| clean_corpus(c, &cfg);
        let splits = Arc::new(CleanedSplits {
            train: clean(&self.train)?,
            validation: self.validation.as_ref().map(clean).transpose()?,
            test: self.test.as_ref().map(clean).transpose()?,
        });
        cache.insert(stage, splits.clone());
        Ok(splits)
    }

    /// Vectorizer fitted on the cleaned training split, applied to every split.
    pub fn features(&self, stage: CleanStage, kind: VectorizerKind, ngrams: NGramConfig) -> Result<Arc<FeatureSplits>> {
        let key = (stage, kind, ngrams);
        if let Some(f) = self.features.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let cleaned = self.cleaned(stage)?;
        let mut cache = self.features.lock().expect("cache lock");
        if let Some(f) = cache.get(&key) {
            return Ok(f.clone());
        }
        let vectorizer = FittedVectorizer::fit(kind, &cleaned.train.docs, ngrams)?;
        let feats = Arc::new(FeatureSplits {
            train: vectorizer.transform_all(&cleaned.train.docs),
            validation: cleaned.validation.as_ref().map(|c| vectorizer.transform_all(&c.docs)),
            test: cleaned.test.as_ref().map(|c| vectorizer.transform_all(&c.docs)),
            vectorizer,
        });
        cache.insert(key, feats.clone());
        Ok(feats)
    }
}

fn read_split(path: &Path, split: Split) -> Result<Corpus> {
    Corpus::read_file(path, split).map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::InvalidInput(format!("{}: {other}", path.display())),
    })
}

/// Reads `uid<sep>label` lines (comma or tab, optional header) and labels the matching tweets.
pub fn attach_labels(corpus: &mut Corpus, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((uid, label)) = line.split_once([',', '\t']) else {
            return Err(Error::Format {
                line: i + 1,
                message: format!("{}: expected uid,label", path.display()),
            });
        };
        match label.trim().parse::<Sentiment>() {
            Ok(l) => {
                labels.insert(uid.trim().to_string(), l);
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Sentiment {
                    line: i + 1,
                    value: label.trim().into(),
                })
            }
        }
    }
    for t in corpus.tweets.iter_mut() {
        if t.label.is_none() {
            t.label = labels.get(&t.uid).copied();
        }
    }
    Ok(())
}

/// Corpus files located in a data directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFiles {
    pub train: PathBuf,
    pub validation: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
}

impl DataFiles {
    /// `train.txt`, `validation.txt` and `test.txt` when present; otherwise the
    /// first file (by name) whose name contains `train`, `dev`/`valid`, or `test`.
    /// A file whose name contains both `test` and `label` is read as test labels.
    pub fn discover(dir: &Path) -> Result<Self> {
        let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        let lower = |p: &Path| p.file_name().map(|n| n.to_string_lossy().to_ascii_lowercase()).unwrap_or_default();
        let exact = |n: &str| names.iter().find(|p| lower(p) == n).cloned();
        let fuzzy = |pred: &dyn Fn(&str) -> bool| names.iter().find(|p| pred(&lower(p))).cloned();
        let is_labels = |n: &str| n.contains("label");
        let train = exact("train.txt")
            .or_else(|| fuzzy(&|n| n.contains("train") && !is_labels(n)))
            .ok_or_else(|| Error::InvalidInput(format!("{}: no training file found", dir.display())))?;
        let validation = exact("validation.txt")
            .or_else(|| fuzzy(&|n| (n.contains("dev") || n.contains("valid")) && !is_labels(n)));
        let test = exact("test.txt").or_else(|| fuzzy(&|n| n.contains("test") && !is_labels(n)));
        let test_labels = fuzzy(&|n| n.contains("test") && is_labels(n));
        Ok(DataFiles {
            train,
            validation,
            test,
            test_labels,
        })
    }
}

pub const PIPELINE_FORMAT: &str = "codemix-pipeline";
pub const PIPELINE_VERSION: u32 = 1;

/// Cleaning resources, fitted vectorizer and trained model in one file, so
/// raw corpus files can be classified without the training data.
#[derive(Debug, Clone)]
pub struct PipelineModel {
    pub stage: CleanStage,
    pub resources: Resources,
    pub vectorizer: FittedVectorizer,
    pub model: SavedModel,
}

#[derive(Serialize, Deserialize)]
struct PipelineFile {
    format: String,
    version: u32,
    stage: CleanStage,
    norm_dict: NormalizationDictionary,
    english_stopwords: WordSet,
    hindi_stopwords: WordSet,
    emoji_map: EmojiMap,
    vectorizer: serde_json::Value,
    model: serde_json::Value,
}

impl PipelineModel {
    pub fn clean(&self, tweet: &Tweet) -> Result<Vec<String>> {
        clean_tweet(tweet, &self.resources.clean_config(self.stage))
    }

    pub fn predict_corpus(&self, corpus: &Corpus) -> Result<Vec<Sentiment>> {
        let cleaned = clean_corpus(corpus, &self.resources.clean_config(self.stage))?;
        let x = self.vectorizer.transform_all(&cleaned.docs);
        Ok(self.model.model.predict_all(&x))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PipelineFile {
            format: PIPELINE_FORMAT.into(),
            version: PIPELINE_VERSION,
            stage: self.stage,
            norm_dict: (*self.resources.norm_dict).clone(),
            english_stopwords: (*self.resources.english_stopwords).clone(),
            hindi_stopwords: (*self.resources.hindi_stopwords).clone(),
            emoji_map: (*self.resources.emoji_map).clone(),
            vectorizer: serde_json::from_str(&self.vectorizer.to_json()?)?,
            model: serde_json::from_str(&self.model.to_json()?)?,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PipelineFile = serde_json::from_str(text)?;
        if f.format != PIPELINE_FORMAT || f.version != PIPELINE_VERSION {
            return Err(Error::InvalidInput(format!("unsupported pipeline file {} v{}", f.format, f.version)));
        }
        f.norm_dict.validate().map_err(Error::InvalidInput)?;
        Ok(PipelineModel {
            stage: f.stage,
            resources: Resources {
                norm_dict: Arc::new(f.norm_dict),
                english_stopwords: Arc::new(f.english_stopwords),
                hindi_stopwords: Arc::new(f.hindi_stopwords),
                emoji_map: Arc::new(f.emoji_map),
            },
            vectorizer: FittedVectorizer::from_json(&f.vectorizer.to_string())?,
            model: SavedModel::from_json(&f.model.to_string())?,
        })
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
