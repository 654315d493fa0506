//! Fold protocol, hyperparameter search and stratified evaluation.

mod evaluate;
mod grid;
mod protocol;
pub mod report;
mod run;

pub use evaluate::{
    clip_nonnegative, evaluate_strata, oracle_predictions, per_station_scores, quantile_crossings,
    LevelPredictions, ModelScores, Skill, StationScores, Stratum, StratumScores,
};
pub use grid::{enumerate_grid, grid_search, GbdtParams, GridSearchResult, Table2Grid};
pub use protocol::{FoldStore, N_FOLDS, TEST_FOLD, TRAIN_FOLD, VALID_FOLD};
pub use report::{write_reports, RUN_SUMMARY_FILE, SCORES_FILE, STATION_SKILL_FILE};
pub use run::{
    refit, run_experiment, CrossingSummary, EvaluationReport, ExperimentConfig, Models,
    ProtocolAudit, TestPredictions, TuningRecord,
};
