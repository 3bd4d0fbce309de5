//! The seven classifiers and the voting ensemble.
//!
//! Every trainer is deterministic given [`TrainConfig::seed`]; parallel
//! sections (forest trees, neighbor search) produce the same result for any
//! thread count.

pub mod forest;
pub mod knn;
pub mod linear;
pub mod naive_bayes;
pub mod tree;
pub mod voting;
pub mod weights;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::features::{DocTermMatrix, SparseVector};

pub use forest::{train_forest, ForestModel};
pub use knn::{knn_predict, select_k, KnnModel};
pub use linear::{calibrate_platt, train_linear_svm, train_logreg, LinearKind, LinearModel, Sigmoid, SvmParams};
pub use naive_bayes::{train_gnb, train_mnb, NaiveBayesModel};
pub use tree::{train_tree, DecisionTree};
pub use voting::{vote, MemberOutput, VoteMode, VotingModel};
pub use weights::{class_counts, compute_class_weights, ClassWeights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    /// Initial gradient-descent step for logistic regression.
    pub learning_rate: f64,
    pub max_iters: usize,
    pub l2_lambda: f64,
    /// Logistic regression stops once a step improves the loss by less than this.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            learning_rate: 1.0,
            max_iters: 1000,
            l2_lambda: 1e-4,
            tolerance: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrainConfig {
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(self.tolerance > 0.0) || !(self.l2_lambda >= 0.0) {
            return Err(Error::Config(
                "learning rate and tolerance must be positive, l2 penalty nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Svm,
    Knn,
    Tree,
    Gnb,
    Mnb,
    Logreg,
    Forest,
    VoteHard,
    VoteSoft,
}

impl ModelKind {
    /// The seven single classifiers, in result-table column order.
    pub const CLASSIFIERS: [ModelKind; 7] = [
        ModelKind::Svm,
        ModelKind::Knn,
        ModelKind::Tree,
        ModelKind::Gnb,
        ModelKind::Mnb,
        ModelKind::Logreg,
        ModelKind::Forest,
    ];
    pub const VOTING: [ModelKind; 2] = [ModelKind::VoteHard, ModelKind::VoteSoft];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
            ModelKind::Gnb => "gnb",
            ModelKind::Mnb => "mnb",
            ModelKind::Logreg => "logreg",
            ModelKind::Forest => "forest",
            ModelKind::VoteHard => "vote-hard",
            ModelKind::VoteSoft => "vote-soft",
        }
    }

    /// Column heading used in result tables.
    pub fn title(self) -> &'static str {
        match self {
            ModelKind::Svm => "SVM",
            ModelKind::Knn => "KNN",
            ModelKind::Tree => "Decision Tree",
            ModelKind::Gnb => "Gaussian Naive Bayes",
            ModelKind::Mnb => "Multinomial Naive Bayes",
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Forest => "Random Forest",
            ModelKind::VoteHard => "Vote (Hard)",
            ModelKind::VoteSoft => "Vote (Soft)",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "svm" => ModelKind::Svm,
            "knn" => ModelKind::Knn,
            "tree" | "decision-tree" => ModelKind::Tree,
            "gnb" => ModelKind::Gnb,
            "mnb" => ModelKind::Mnb,
            "logreg" => ModelKind::Logreg,
            "forest" | "random-forest" => ModelKind::Forest,
            "vote-hard" => ModelKind::VoteHard,
            "vote-soft" => ModelKind::VoteSoft,
            _ => {
                return Err(format!(
                    "unknown model {s:?} (expected svm, knn, tree, forest, gnb, mnb, logreg, vote-hard or vote-soft)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_estimators: usize,
    /// Fixed neighbor count; `None` selects it on the validation split.
    pub k: Option<usize>,
    pub mnb_alpha: f64,
    /// Densification budget for Gaussian naive Bayes, in bytes.
    pub memory_budget: u64,
    pub svm: SvmParams,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            n_estimators: forest::DEFAULT_N_ESTIMATORS,
            k: None,
            mnb_alpha: 1.0,
            memory_budget: naive_bayes::DEFAULT_MEMORY_BUDGET,
            svm: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase")]
pub enum TrainedModel {
    Linear(LinearModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
    Tree(DecisionTree),
    Forest(ForestModel),
    Voting(VotingModel),
}

/// Labeled feature rows.
#[derive(Debug, Clone, Copy)]
pub struct Labeled<'a> {
    pub x: &'a DocTermMatrix,
    pub y: &'a [Sentiment],
}

/// Trains `kind`. The validation split, when given, selects KNN's `k` and
/// calibrates the SVM inside soft voting; without it the training split calibrates
/// and `k` falls back to [`knn::FALLBACK_K`].
pub fn train_model(
    kind: ModelKind,
    hp: &HyperParams,
    cfg: &TrainConfig,
    train: Labeled<'_>,
    validation: Option<Labeled<'_>>,
) -> Result<TrainedModel> {
    let Labeled { x, y } = train;
    if x.n_rows() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!("{} feature rows but {} labels", x.n_rows(), y.len())));
    }
    let w = compute_class_weights(y)?;
    Ok(match kind {
        ModelKind::Svm => TrainedModel::Linear(train_linear_svm(x, y, &w, cfg, &hp.svm)?),
        ModelKind::Logreg => TrainedModel::Linear(train_logreg(x, y, &w, cfg)?),
        ModelKind::Mnb => TrainedModel::NaiveBayes(train_mnb(x, y, hp.mnb_alpha, None)?),
        ModelKind::Gnb => TrainedModel::NaiveBayes(train_gnb(x, y, hp.memory_budget)?),
        ModelKind::Tree => TrainedModel::Tree(train_tree(x, y, &w)?),
        ModelKind::Forest => TrainedModel::Forest(train_forest(x, y, &w, hp.n_estimators, cfg)?),
        ModelKind::Knn => {
            let mut model = KnnModel::new(x.clone(), y.to_vec(), 1)?;
            model.k = match (hp.k, validation) {
                (Some(k), _) => {
                    if k == 0 || k > x.n_rows() {
                        return Err(Error::Config(format!("k = {k} must lie in 1..={}", x.n_rows())));
                    }
                    k
                }
                (None, Some(v)) if !v.y.is_empty() => select_k(&model, v.x, v.y, 1..=knn::K_MAX)?,
                (None, _) => knn::FALLBACK_K.min(x.n_rows()),
            };
            TrainedModel::Knn(model)
        }
        ModelKind::VoteHard | ModelKind::VoteSoft => {
            let mode = if kind == ModelKind::VoteSoft { VoteMode::Soft } else { VoteMode::Hard };
            let (svm, logreg, forest) = (
                train_linear_svm(x, y, &w, cfg, &hp.svm)?,
                train_logreg(x, y, &w, cfg)?,
                train_forest(x, y, &w, hp.n_estimators, cfg)?,
            );
            let svm = if mode == VoteMode::Soft {
                let cal = validation
                    .filter(|v| v.y.iter().any(|l| *l != v.y[0]))
                    .unwrap_or(train);
                calibrate_platt(&svm, cal.x, cal.y)?
            } else {
                svm
            };
            TrainedModel::Voting(VotingModel::new(svm, logreg, forest, mode, class_counts(y))?)
        }
    })
}

impl TrainedModel {
    pub fn predict(&self, x: &SparseVector) -> Sentiment {
        match self {
            TrainedModel::Linear(m) => m.predict(x),
            TrainedModel::NaiveBayes(m) => m.predict(x),
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::Tree(m) => m.predict(x),
            TrainedModel::Forest(m) => m.predict(x),
            TrainedModel::Voting(m) => m.predict(x).expect("voting members validated at construction"),
        }
    }

    /// Class probabilities, for models that produce them.
    pub fn predict_proba(&self, x: &SparseVector) -> Option<[f64; 3]> {
        match self {
            TrainedModel::Linear(m) => m.predict_proba(x),
            TrainedModel::NaiveBayes(m) => Some(m.predict_proba(x)),
            TrainedModel::Knn(_) => None,
            TrainedModel::Tree(m) => Some(m.predict_proba(x)),
            TrainedModel::Forest(m) => Some(m.predict_proba(x)),
            TrainedModel::Voting(m) => m.predict_proba(x).ok(),
        }
    }

    pub fn predict_all(&self, x: &DocTermMatrix) -> Vec<Sentiment> {
        x.rows.par_iter().map(|r| self.predict(r)).collect()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let TrainedModel::Voting(v) = self {
            VotingModel::new(v.svm.clone(), v.logreg.clone(), v.forest.clone(), v.mode, v.prior_counts)?;
        }
        if let TrainedModel::Knn(k) = self {
            if k.k == 0 || k.k > k.labels.len() || k.labels.len() != k.x.n_rows() {
                return Err(Error::InvalidInput("stored knn model is inconsistent".into()));
            }
        }
        Ok(())
    }
}

pub const MODEL_FORMAT: &str = "codemix-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    kind: ModelKind,
    hyperparams: HyperParams,
    config: TrainConfig,
    model: TrainedModel,
}

/// A trained model with the settings that produced it.
#[derive(Debug, Clone)]
pub struct SavedModel {
    pub kind: ModelKind,
    pub hyperparams: HyperParams,
    pub config: TrainConfig,
    pub model: TrainedModel,
}

impl SavedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            kind: self.kind,
            hyperparams: self.hyperparams,
            config: self.config,
            model: self.model.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(Error::InvalidInput(format!("unsupported model file {} v{}", f.format, f.version)));
        }
        f.model.validate()?;
        Ok(SavedModel {
            kind: f.kind,
            hyperparams: f.hyperparams,
            config: f.config,
            model: f.model,
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

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (DocTermMatrix, Vec<Sentiment>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for rep in 0..10u32 {
            for c in 0..3u32 {
                rows.push(SparseVector::from_pairs(vec![(c, 1.0), (3 + rep % 4, 0.5)]));
                y.push(Sentiment::from_index(c as usize).unwrap());
            }
        }
        (DocTermMatrix::new(rows, 7), y)
    }

    #[test]
    fn every_kind_trains_and_round_trips() {
        let (x, y) = toy();
        let hp = HyperParams {
            n_estimators: 10,
            ..HyperParams::default()
        };
        let cfg = TrainConfig::default();
        let data = Labeled { x: &x, y: &y };
        for kind in ModelKind::CLASSIFIERS.into_iter().chain(ModelKind::VOTING) {
            let model = train_model(kind, &hp, &cfg, data, Some(data)).unwrap();
            let pred = model.predict_all(&x);
            assert_eq!(pred, y, "{kind}");
            if let Some(p) = model.predict_proba(&x.rows[0]) {
                assert!(p.iter().all(|&v| v >= 0.0));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{kind}");
            }
            let saved = SavedModel {
                kind,
                hyperparams: hp,
                config: cfg,
                model,
            };
            let back = SavedModel::from_json(&saved.to_json().unwrap()).unwrap();
            assert_eq!(back.model.predict_all(&x), pred, "{kind}");
        }
    }

    #[test]
    fn kind_names_parse() {
        for kind in ModelKind::CLASSIFIERS.into_iter().chain(ModelKind::VOTING) {
            assert_eq!(kind.as_str().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("mlp".parse::<ModelKind>().is_err());
    }

    #[test]
    fn fixed_k_bounds() {
        let (x, y) = toy();
        let hp = HyperParams {
            k: Some(31),
            ..HyperParams::default()
        };
        let data = Labeled { x: &x, y: &y };
        assert!(train_model(ModelKind::Knn, &hp, &TrainConfig::default(), data, None).is_err());
    }
}
