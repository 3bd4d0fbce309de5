use rayon::prelude::*;

use super::experiment::{run_experiment, ExperimentSpec};
use super::table::{Cell, ResultTable};
use crate::clean::CleanStage;
use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::features::{NGramConfig, VectorizerKind};
use crate::models::ModelKind;
use crate::pipeline::ExperimentData;

/// Built-in grids run by `replicate`, in order.
pub const REPLICATION_GRIDS: [&str; 10] = [
    "exp1",
    "exp2",
    "exp3",
    "exp4",
    "exp5",
    "exp7",
    "exp8",
    "exp9-iter4",
    "exp9-iter5",
    "exp10",
];

/// Every built-in grid name.
pub const GRID_NAMES: [&str; 11] = [
    "exp1",
    "exp2",
    "exp3",
    "exp4",
    "exp5",
    "exp7",
    "exp8",
    "exp9-iter4",
    "exp9-iter5",
    "exp10",
    "synthetic",
];

/// Forest size used by the `synthetic` grid.
pub const SYNTHETIC_N_ESTIMATORS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub spec: ExperimentSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub name: String,
    pub description: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<GridCell>,
}

fn vectorizer_title(kind: VectorizerKind) -> &'static str {
    match kind {
        VectorizerKind::Count => "Count Vectorizer",
        VectorizerKind::OneHot => "One Hot Binarizer",
        VectorizerKind::Tfidf => "Tf-Idf Vectorizer",
    }
}

fn ngram_title(n: &NGramConfig) -> &'static str {
    match (n.n_low, n.n_high) {
        (1, 1) => "Uni",
        (1, 3) => "Uni-bi-tri",
        _ => "other",
    }
}

fn uni(min_df: usize) -> NGramConfig {
    NGramConfig::unigrams().with_min_df(min_df)
}

fn uni_bi_tri(min_df: usize) -> NGramConfig {
    NGramConfig::new(1, 3, min_df).expect("valid range")
}

impl Grid {
    /// One row per spec, a single macro-F1 column.
    pub fn from_specs(name: impl Into<String>, specs: &[ExperimentSpec]) -> Self {
        Grid {
            name: name.into(),
            description: "experiment specs".into(),
            rows: specs.iter().map(ExperimentSpec::label).collect(),
            cols: vec!["Macro-F1".into()],
            cells: specs
                .iter()
                .enumerate()
                .map(|(row, spec)| GridCell { row, col: 0, spec: *spec })
                .collect(),
        }
    }

    /// Vectorizers down the side, the seven classifiers across.
    fn vectorizers_by_classifier(name: &str, stage: CleanStage, split: Split) -> Self {
        let mut cells = Vec::new();
        for (row, kind) in VectorizerKind::ALL.into_iter().enumerate() {
            for (col, model) in ModelKind::CLASSIFIERS.into_iter().enumerate() {
                let mut spec = ExperimentSpec::new(stage, kind, uni(1), model);
                spec.split = split;
                cells.push(GridCell { row, col, spec });
            }
        }
        Grid {
            name: name.into(),
            description: format!("stage {stage}, unigrams f = 1, three vectorizers by seven classifiers"),
            rows: VectorizerKind::ALL.iter().map(|k| vectorizer_title(*k).to_string()).collect(),
            cols: ModelKind::CLASSIFIERS.iter().map(|m| m.title().to_string()).collect(),
            cells,
        }
    }

    /// tf-idf uni-bi-trigrams at f in {1, 2, 3, 5} by the seven classifiers.
    fn frequencies_by_classifier(name: &str, stage: CleanStage, split: Split) -> Self {
        const FREQS: [usize; 4] = [1, 2, 3, 5];
        let mut cells = Vec::new();
        for (row, f) in FREQS.into_iter().enumerate() {
            for (col, model) in ModelKind::CLASSIFIERS.into_iter().enumerate() {
                let mut spec = ExperimentSpec::new(stage, VectorizerKind::Tfidf, uni_bi_tri(f), model);
                spec.split = split;
                cells.push(GridCell { row, col, spec });
            }
        }
        Grid {
            name: name.into(),
            description: format!("stage {stage}, tf-idf uni-bi-trigrams, minimum frequency by classifier"),
            rows: FREQS.iter().map(|f| format!("f = {f}")).collect(),
            cols: ModelKind::CLASSIFIERS.iter().map(|m| m.title().to_string()).collect(),
            cells,
        }
    }

    /// Hard and soft voting by (vectorizer, n-gram setting).
    fn voting(name: &str, stage: CleanStage, split: Split) -> Self {
        let settings = [uni(1), uni_bi_tri(2)];
        let mut cols = Vec::new();
        let mut cells = Vec::new();
        for kind in VectorizerKind::ALL {
            for ng in settings {
                let col = cols.len();
                cols.push(format!("{} / {}", vectorizer_title(kind), ngram_title(&ng)));
                for (row, model) in ModelKind::VOTING.into_iter().enumerate() {
                    let mut spec = ExperimentSpec::new(stage, kind, ng, model);
                    spec.split = split;
                    cells.push(GridCell { row, col, spec });
                }
            }
        }
        cells.sort_by_key(|c| (c.row, c.col));
        Grid {
            name: name.into(),
            description: format!("stage {stage}, hard and soft voting over svm, logistic regression, forest"),
            rows: ModelKind::VOTING.iter().map(|m| m.title().to_string()).collect(),
            cols,
            cells,
        }
    }

    /// Soft voting, stage I4, tf-idf: forest size and n-gram setting across, f down.
    fn forest_sizes(name: &str, split: Split) -> Self {
        const SIZES: [usize; 3] = [750, 900, 1250];
        const FREQS: [usize; 3] = [1, 2, 3];
        let mut cols = Vec::new();
        for n in SIZES {
            for t in ["Uni", "Uni-bi-tri"] {
                cols.push(format!("N estimator = {n} / {t}"));
            }
        }
        let mut cells = Vec::new();
        for (row, f) in FREQS.into_iter().enumerate() {
            for (si, n) in SIZES.into_iter().enumerate() {
                for (ni, ng) in [uni(f), uni_bi_tri(f)].into_iter().enumerate() {
                    let mut spec = ExperimentSpec::new(CleanStage::I4, VectorizerKind::Tfidf, ng, ModelKind::VoteSoft);
                    spec.hyperparams.n_estimators = n;
                    spec.split = split;
                    cells.push(GridCell {
                        row,
                        col: si * 2 + ni,
                        spec,
                    });
                }
            }
        }
        Grid {
            name: name.into(),
            description: "stage I4, tf-idf, soft voting with forest sizes 750/900/1250".into(),
            rows: FREQS.iter().map(|f| format!("f = {f}")).collect(),
            cols,
            cells,
        }
    }

    /// Stage I3 tf-idf unigrams, every classifier and both voting modes, with small forests.
    fn synthetic(split: Split) -> Self {
        let models: Vec<ModelKind> = ModelKind::CLASSIFIERS.into_iter().chain(ModelKind::VOTING).collect();
        let cells = models
            .iter()
            .enumerate()
            .map(|(col, &model)| {
                let mut spec = ExperimentSpec::new(CleanStage::I3, VectorizerKind::Tfidf, uni(1), model);
                spec.hyperparams.n_estimators = SYNTHETIC_N_ESTIMATORS;
                spec.split = split;
                GridCell { row: 0, col, spec }
            })
            .collect();
        Grid {
            name: "synthetic".into(),
            description: "stage I3, tf-idf unigrams, all models (forests of 100 trees)".into(),
            rows: vec![vectorizer_title(VectorizerKind::Tfidf).into()],
            cols: models.iter().map(|m| m.title().to_string()).collect(),
            cells,
        }
    }
}

/// Looks up a built-in grid, evaluating on `split`.
pub fn builtin_grid(name: &str, split: Split) -> Result<Grid> {
    let stage = |n| CleanStage::from_number(n).expect("stage 1-5");
    Ok(match name {
        "exp1" | "exp2" | "exp3" | "exp4" | "exp5" => {
            let n = name[3..].parse::<u8>().expect("digit");
            Grid::vectorizers_by_classifier(name, stage(n), split)
        }
        "exp7" => Grid::frequencies_by_classifier(name, CleanStage::I5, split),
        "exp8" => Grid::frequencies_by_classifier(name, CleanStage::I4, split),
        "exp9-iter4" => Grid::voting(name, CleanStage::I4, split),
        "exp9-iter5" => Grid::voting(name, CleanStage::I5, split),
        "exp10" => Grid::forest_sizes(name, split),
        "synthetic" => Grid::synthetic(split),
        _ => {
            return Err(Error::UnknownGrid {
                name: name.into(),
                available: GRID_NAMES.join(", "),
            })
        }
    })
}

/// Runs every cell on a pool of `jobs` threads. Cells that exhaust a resource
/// budget become `KC`; any other failure aborts the grid. The table does not
/// depend on `jobs`.
pub fn run_grid(grid: &Grid, data: &ExperimentData, jobs: usize) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    let mut table = ResultTable::new(grid.name.clone(), grid.rows.clone(), grid.cols.clone());
    let outcomes = pool.install(|| -> Result<Vec<Result<f64>>> {
        // featurize up front so parallel cells only read the caches
        for c in &grid.cells {
            data.features(c.spec.stage, c.spec.vectorizer, c.spec.ngrams)?;
        }
        Ok(grid
            .cells
            .par_iter()
            .map(|c| run_experiment(&c.spec, data).map(|r| r.macro_f1))
            .collect())
    })?;
    for (cell, outcome) in grid.cells.iter().zip(outcomes) {
        match outcome {
            Ok(score) => table.set(cell.row, cell.col, Cell::Score(score)),
            Err(e) if e.is_resource() => table.set(cell.row, cell.col, Cell::ResourceExhausted),
            Err(e) => {
                return Err(Error::InvalidInput(format!("{} [{}]: {e}", grid.name, cell.spec.label())));
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn grid_shapes() {
        for (name, n) in [
            ("exp1", 21),
            ("exp5", 21),
            ("exp7", 28),
            ("exp8", 28),
            ("exp9-iter4", 12),
            ("exp9-iter5", 12),
            ("exp10", 18),
            ("synthetic", 9),
        ] {
            let g = builtin_grid(name, Split::Test).unwrap();
            assert_eq!(g.cells.len(), n, "{name}");
            let distinct: BTreeSet<(usize, usize)> = g.cells.iter().map(|c| (c.row, c.col)).collect();
            assert_eq!(distinct.len(), n, "{name}");
            assert!(g.cells.iter().all(|c| c.row < g.rows.len() && c.col < g.cols.len()));
        }
    }

    #[test]
    fn grid_contents() {
        let g = builtin_grid("exp3", Split::Validation).unwrap();
        assert!(g.cells.iter().all(|c| c.spec.stage == CleanStage::I3 && c.spec.split == Split::Validation));
        let g = builtin_grid("exp10", Split::Test).unwrap();
        let best = g
            .cells
            .iter()
            .find(|c| g.rows[c.row] == "f = 2" && g.cols[c.col] == "N estimator = 750 / Uni")
            .unwrap();
        assert_eq!(best.spec.hyperparams.n_estimators, 750);
        assert_eq!(best.spec.ngrams, NGramConfig::unigrams().with_min_df(2));
        assert_eq!(best.spec.model, ModelKind::VoteSoft);
        assert_eq!(best.spec.stage, CleanStage::I4);
    }

    #[test]
    fn unknown_grid_lists_names() {
        let err = builtin_grid("exp6", Split::Test).unwrap_err().to_string();
        assert!(err.contains("exp10") && err.contains("exp6"));
    }

    #[test]
    fn empty_spec_list() {
        let g = Grid::from_specs("none", &[]);
        assert!(g.cells.is_empty());
    }
}
