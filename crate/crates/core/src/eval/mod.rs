//! Macro-F1 scoring, experiment specs, built-in grids and result tables.

pub mod experiment;
pub mod grid;
pub mod metrics;
pub mod table;

pub use experiment::{parse_specs, render_specs, run_experiment, train_pipeline, ExperimentSpec};
pub use grid::{builtin_grid, run_grid, Grid, GridCell, GRID_NAMES, REPLICATION_GRIDS};
pub use metrics::{evaluate, macro_f1, ClassScores, ConfusionMatrix, EvalReport};
pub use table::{Cell, ResultTable, TableFormat, KC};
