use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::evaluate::{
    clip_nonnegative, evaluate_strata, per_station_scores, quantile_crossings, StationScores,
    StratumScores,
};
use super::grid::{grid_search, GbdtParams, Table2Grid};
use super::protocol::{FoldStore, N_FOLDS, TEST_FOLD, TRAIN_FOLD, VALID_FOLD};
use crate::error::{Error, Result};
use crate::features::{FoldAssignment, Sample};
use crate::gbdt::{fit_quantile_gbdt, GbdtConfig, GbdtModel, GossConfig, DEFAULT_BINS};
use crate::qrf::{fit_qrf, QrfConfig, QrfModel};
use crate::scoring::QuantileLevel;
use crate::seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Models {
    Gbdt,
    Qrf,
    #[default]
    Both,
}

impl Models {
    pub fn gbdt(self) -> bool {
        matches!(self, Models::Gbdt | Models::Both)
    }

    pub fn qrf(self) -> bool {
        matches!(self, Models::Qrf | Models::Both)
    }
}

impl FromStr for Models {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gbdt" => Ok(Models::Gbdt),
            "qrf" => Ok(Models::Qrf),
            "both" => Ok(Models::Both),
            _ => Err(Error::InvalidArgument(format!(
                "unknown model selection '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Models {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Models::Gbdt => "gbdt",
            Models::Qrf => "qrf",
            Models::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Master seed; fold, booster and forest seeds derive from it.
    pub seed: u64,
    pub tau_levels: Vec<QuantileLevel>,
    pub models: Models,
    pub grid: Table2Grid,
    /// When set, every level uses these hyperparameters instead of a search.
    pub fixed_gbdt: Option<GbdtParams>,
    pub early_stopping_round: usize,
    pub n_bins: usize,
    pub goss: Option<GossConfig>,
    /// Forest settings; its `seed` is replaced by one derived from `seed`.
    pub qrf: QrfConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            tau_levels: QuantileLevel::defaults(),
            models: Models::Both,
            grid: Table2Grid::default(),
            fixed_gbdt: None,
            early_stopping_round: 20,
            n_bins: DEFAULT_BINS,
            goss: None,
            qrf: QrfConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau_levels.is_empty() {
            return Err(Error::Config("tau_levels is empty".into()));
        }
        if self.early_stopping_round == 0 {
            return Err(Error::Config(
                "early_stopping_round must be positive".into(),
            ));
        }
        if self.models.gbdt() && self.fixed_gbdt.is_none() && self.grid.params().is_empty() {
            return Err(Error::Config("hyperparameter grid is empty".into()));
        }
        Ok(())
    }

    /// Levels in ascending order without repeats.
    pub fn levels(&self) -> Vec<QuantileLevel> {
        let mut t = self.tau_levels.clone();
        t.sort_by(|a, b| a.value().total_cmp(&b.value()));
        t.dedup();
        t
    }

    pub fn grid_params(&self) -> Vec<GbdtParams> {
        match self.fixed_gbdt {
            Some(p) => vec![p],
            None => self.grid.params(),
        }
    }

    /// Booster settings shared by every grid point at level number `k`.
    pub fn gbdt_base(&self, tau: QuantileLevel, k: usize) -> GbdtConfig {
        GbdtConfig {
            early_stopping_round: self.early_stopping_round,
            n_bins: self.n_bins,
            goss: self.goss,
            seed: seed::derive(self.seed, "gbdt", k as u64),
            ..GbdtConfig::new(tau)
        }
    }

    pub fn qrf_config(&self) -> QrfConfig {
        QrfConfig {
            seed: seed::derive(self.seed, "qrf", 0),
            ..self.qrf
        }
    }
}

/// Outcome of tuning at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningRecord {
    pub tau: f64,
    pub params: GbdtParams,
    pub best_iteration: usize,
    pub valid_score: f64,
    pub grid_index: usize,
    pub grid_size: usize,
}

/// Rows handed out per fold, recorded after tuning and after the whole run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProtocolAudit {
    pub reads_after_tuning: Vec<usize>,
    pub reads_total: Vec<usize>,
}

impl ProtocolAudit {
    pub fn test_reads_during_tuning(&self) -> usize {
        self.reads_after_tuning[TEST_FOLD]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CrossingSummary {
    pub points: usize,
    pub pairs: usize,
}

/// Test-fold predictions indexed `[level][row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPredictions {
    pub gbdt: Option<Vec<Vec<f64>>>,
    pub qrf: Option<Vec<Vec<f64>>>,
    pub observations: Vec<f64>,
    pub station_ids: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub models: Models,
    pub seed: u64,
    pub tau_levels: Vec<QuantileLevel>,
    pub fold_sizes: Vec<usize>,
    pub tuning: Vec<TuningRecord>,
    pub strata: Vec<StratumScores>,
    pub stations: Vec<StationScores>,
    pub gbdt_crossings: Option<CrossingSummary>,
    pub audit: ProtocolAudit,
    pub predictions: TestPredictions,
    pub gbdt_models: Vec<GbdtModel>,
    pub qrf_model: Option<QrfModel>,
}

/// Tunes the booster per level on the first fold with early stopping on the
/// second, refits it on both, fits the forest on both, and scores the
/// clipped predictions of each on the third fold. The booster is the
/// candidate and the forest the reference in all skill scores.
pub fn run_experiment(
    samples: &[Sample],
    folds: &FoldAssignment,
    config: &ExperimentConfig,
) -> Result<EvaluationReport> {
    config.validate()?;
    if folds.n_folds != N_FOLDS {
        return Err(Error::InvalidArgument(format!(
            "expected {N_FOLDS} folds, got {}",
            folds.n_folds
        )));
    }
    let store = FoldStore::new(samples, folds)?;
    let taus = config.levels();

    let mut tuning = Vec::new();
    if config.models.gbdt() {
        let train = store.dataset(&[TRAIN_FOLD]);
        let valid = store.dataset(&[VALID_FOLD]);
        let params = config.grid_params();
        for (k, &tau) in taus.iter().enumerate() {
            let base = config.gbdt_base(tau, k);
            let grid: Vec<GbdtConfig> = params.iter().map(|p| p.apply(&base)).collect();
            let g = grid_search(&train, &valid, &grid)?;
            tuning.push(TuningRecord {
                tau: tau.value(),
                params: GbdtParams::of(&g.config),
                best_iteration: g.best_iteration,
                valid_score: g.valid_score,
                grid_index: g.best,
                grid_size: grid.len(),
            });
        }
    }
    let reads_after_tuning = store.reads();

    let train = store.dataset(&[TRAIN_FOLD, VALID_FOLD]);
    let mut gbdt_models = Vec::new();
    for (k, (&tau, t)) in taus.iter().zip(&tuning).enumerate() {
        gbdt_models.push(refit(
            &train,
            &t.params.apply(&config.gbdt_base(tau, k)),
            t.best_iteration,
        )?);
    }
    let qrf_model = config
        .models
        .qrf()
        .then(|| fit_qrf(&train, &config.qrf_config()))
        .transpose()?;

    let test_samples = store.samples(&[TEST_FOLD]);
    let test = crate::matrix::Dataset::from_samples(test_samples.iter().copied());
    let tau_values: Vec<f64> = taus.iter().map(|t| t.value()).collect();
    let gbdt_preds = if config.models.gbdt() {
        Some(
            gbdt_models
                .iter()
                .map(|m| Ok(clip_nonnegative(&m.predict(&test.x)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let qrf_preds = match &qrf_model {
        Some(m) => {
            let rows = m.predict(&test.x, &tau_values)?;
            Some(
                (0..taus.len())
                    .map(|k| rows.iter().map(|r| r[k]).collect())
                    .collect::<Vec<Vec<f64>>>(),
            )
        }
        None => None,
    };
    let check_nonnegative = |p: &Option<Vec<Vec<f64>>>, what: &str| -> Result<()> {
        if p.iter().flatten().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::Invariant(format!(
                "{what} emitted a negative or non-finite prediction"
            )));
        }
        Ok(())
    };
    check_nonnegative(&gbdt_preds, "booster")?;
    check_nonnegative(&qrf_preds, "forest")?;

    let station_ids: Vec<String> = test_samples.iter().map(|s| s.station_id.clone()).collect();
    let strata = evaluate_strata(gbdt_preds.as_deref(), qrf_preds.as_deref(), &test.y, &taus)?;
    let stations = per_station_scores(
        gbdt_preds.as_deref(),
        qrf_preds.as_deref(),
        &test.y,
        &station_ids,
        &taus,
    )?;
    let gbdt_crossings = gbdt_preds.as_deref().map(|p| {
        let (points, pairs) = quantile_crossings(p);
        CrossingSummary { points, pairs }
    });

    Ok(EvaluationReport {
        models: config.models,
        seed: config.seed,
        tau_levels: taus,
        fold_sizes: store.sizes(),
        tuning,
        strata,
        stations,
        gbdt_crossings,
        audit: ProtocolAudit {
            reads_after_tuning,
            reads_total: store.reads(),
        },
        predictions: TestPredictions {
            gbdt: gbdt_preds,
            qrf: qrf_preds,
            observations: test.y,
            station_ids,
        },
        gbdt_models,
        qrf_model,
    })
}

/// Refit with the tuned number of rounds and no early stopping.
pub fn refit(
    train: &crate::matrix::Dataset,
    config: &GbdtConfig,
    best_iteration: usize,
) -> Result<GbdtModel> {
    let c = GbdtConfig {
        num_iterations: best_iteration.max(1),
        early_stopping_round: 0,
        ..*config
    };
    let mut m = fit_quantile_gbdt(train, None, &c)?;
    if best_iteration == 0 {
        m.trees.clear();
        m.best_iteration = 0;
    }
    m.config.num_iterations = c.num_iterations;
    Ok(m)
}
