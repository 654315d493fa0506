use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{fit_quantile_gbdt, GbdtConfig};
use crate::matrix::Dataset;
use crate::scoring::mean_quantile_score;

/// Tunable booster hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub max_depth: usize,
    pub min_data_in_leaf: usize,
    pub learning_rate: f64,
    pub num_iterations: usize,
    pub num_leaves: usize,
}

impl GbdtParams {
    pub fn of(config: &GbdtConfig) -> Self {
        GbdtParams {
            max_depth: config.max_depth,
            min_data_in_leaf: config.min_data_in_leaf,
            learning_rate: config.learning_rate,
            num_iterations: config.num_iterations,
            num_leaves: config.num_leaves,
        }
    }

    /// `base` with these hyperparameters.
    pub fn apply(&self, base: &GbdtConfig) -> GbdtConfig {
        GbdtConfig {
            max_depth: self.max_depth,
            min_data_in_leaf: self.min_data_in_leaf,
            learning_rate: self.learning_rate,
            num_iterations: self.num_iterations,
            num_leaves: self.num_leaves,
            ..*base
        }
    }
}

/// Value sets searched for the booster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table2Grid {
    pub max_depth: Vec<usize>,
    pub min_data_in_leaf: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub num_iterations: Vec<usize>,
    pub num_leaves: Vec<usize>,
}

impl Default for Table2Grid {
    fn default() -> Self {
        Table2Grid {
            max_depth: vec![6, 8, 10],
            min_data_in_leaf: vec![20, 100, 200, 500, 1000],
            learning_rate: vec![0.02, 0.05, 0.1],
            num_iterations: vec![400],
            num_leaves: vec![20, 40, 60, 80, 100, 200, 500],
        }
    }
}

impl Table2Grid {
    pub fn single(p: GbdtParams) -> Self {
        Table2Grid {
            max_depth: vec![p.max_depth],
            min_data_in_leaf: vec![p.min_data_in_leaf],
            learning_rate: vec![p.learning_rate],
            num_iterations: vec![p.num_iterations],
            num_leaves: vec![p.num_leaves],
        }
    }

    /// All combinations with `num_leaves <= 2^max_depth`, varying the last
    /// field fastest in the order max_depth, min_data_in_leaf,
    /// learning_rate, num_iterations, num_leaves.
    pub fn params(&self) -> Vec<GbdtParams> {
        let mut out = Vec::new();
        for &max_depth in &self.max_depth {
            for &min_data_in_leaf in &self.min_data_in_leaf {
                for &learning_rate in &self.learning_rate {
                    for &num_iterations in &self.num_iterations {
                        for &num_leaves in &self.num_leaves {
                            let fits = max_depth >= usize::BITS as usize - 1
                                || num_leaves <= 1usize << max_depth;
                            if fits {
                                out.push(GbdtParams {
                                    max_depth,
                                    min_data_in_leaf,
                                    learning_rate,
                                    num_iterations,
                                    num_leaves,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Grid configurations built on `base` (which supplies tau, early
/// stopping, binning, sampling and seed).
pub fn enumerate_grid(grid: &Table2Grid, base: &GbdtConfig) -> Vec<GbdtConfig> {
    grid.params().iter().map(|p| p.apply(base)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    /// Position of the winner in the grid.
    pub best: usize,
    pub config: GbdtConfig,
    pub best_iteration: usize,
    pub valid_score: f64,
    /// Validation score of every configuration, in grid order.
    pub scores: Vec<f64>,
    pub best_iterations: Vec<usize>,
}

/// Fits every configuration on `train` with early stopping on `valid` and
/// keeps the lowest validation mean quantile score; ties go to the earlier
/// configuration.
pub fn grid_search(
    train: &Dataset,
    valid: &Dataset,
    grid: &[GbdtConfig],
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    if train.is_empty() || valid.is_empty() {
        return Err(Error::EmptyInput("tuning fold"));
    }
    let fits: Vec<(f64, usize)> = grid
        .par_iter()
        .map(|c| {
            let model = fit_quantile_gbdt(train, Some(valid), c)?;
            let pred = model.predict(&valid.x)?;
            Ok((
                mean_quantile_score(&pred, &valid.y, c.tau)?,
                model.best_iteration,
            ))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, f) in fits.iter().enumerate() {
        if f.0 < fits[best].0 {
            best = k;
        }
    }
    Ok(GridSearchResult {
        best,
        config: grid[best],
        best_iteration: fits[best].1,
        valid_score: fits[best].0,
        scores: fits.iter().map(|f| f.0).collect(),
        best_iterations: fits.iter().map(|f| f.1).collect(),
    })
}
