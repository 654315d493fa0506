use super::binning::BinnedMatrix;
use super::config::GbdtConfig;
use super::goss::goss_sample;
use super::tree::{grow_tree, GrowParams, Node, Tree};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::matrix::{Dataset, FeatureMatrix};
use crate::quantile::select_quantile;
use crate::scoring::pinball_unchecked;
use crate::seed;

/// Additive tree ensemble for one quantile level.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub config: GbdtConfig,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub feature_count: usize,
    /// Number of leading trees used for prediction.
    pub best_iteration: usize,
}

/// Per-round mean quantile scores recorded during a fit. Index 0 of
/// `train_scores` is the base score alone; `valid_scores[t]` follows tree `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitLog {
    pub train_scores: Vec<f64>,
    pub valid_scores: Vec<f64>,
    pub stopped_early: bool,
}

impl GbdtModel {
    pub fn tau(&self) -> f64 {
        self.config.tau.value()
    }

    pub fn learning_rate(&self) -> f64 {
        self.config.learning_rate
    }

    pub fn used_trees(&self) -> &[Tree] {
        &self.trees[..self.best_iteration.min(self.trees.len())]
    }

    #[inline]
    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let lr = self.config.learning_rate;
        let mut pred = self.base_score;
        for t in self.used_trees() {
            pred += lr * t.predict(x);
        }
        pred
    }

    /// Unclipped prediction; may be negative.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_count {
            return Err(Error::FeatureMismatch {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub fn predict_features(&self, features: &FeatureVector) -> Result<f64> {
        self.predict_raw(&features.to_array())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_features() != self.feature_count {
            return Err(Error::FeatureMismatch {
                expected: self.feature_count,
                got: x.n_features(),
            });
        }
        Ok(x.rows().map(|r| self.predict_unchecked(r)).collect())
    }
}

fn mean_pinball(pred: &[f64], y: &[f64], tau: f64) -> f64 {
    pred.iter()
        .zip(y)
        .map(|(&p, &t)| pinball_unchecked(p - t, tau))
        .sum::<f64>()
        / y.len() as f64
}

pub fn fit_quantile_gbdt(
    train: &Dataset,
    valid: Option<&Dataset>,
    config: &GbdtConfig,
) -> Result<GbdtModel> {
    fit_quantile_gbdt_logged(train, valid, config).map(|(m, _)| m)
}

/// Boosting on the pinball loss.
///
/// Each round grows one leaf-wise tree on the subgradients
/// `I(F - y >= 0) - tau` (unit curvature), then resets every leaf to the
/// `tau`-quantile of the residuals `y - F` of all training rows in it, which
/// minimises the within-leaf pinball loss. Training stops early once the
/// validation score has not improved for `early_stopping_round` rounds.
pub fn fit_quantile_gbdt_logged(
    train: &Dataset,
    valid: Option<&Dataset>,
    config: &GbdtConfig,
) -> Result<(GbdtModel, FitLog)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    let valid = valid.filter(|v| !v.is_empty());
    if config.early_stopping_round > 0 && valid.is_none() {
        return Err(Error::InvalidArgument(
            "early stopping needs a non-empty validation set".into(),
        ));
    }
    let p = train.x.n_features();
    if let Some(v) = valid {
        if v.x.n_features() != p {
            return Err(Error::FeatureMismatch {
                expected: p,
                got: v.x.n_features(),
            });
        }
    }

    let tau = config.tau.value();
    let lr = config.learning_rate;
    let n = train.len();
    let bins = BinnedMatrix::new(&train.x, config.n_bins);
    let base_score = select_quantile(&mut train.y.clone(), tau).expect("non-empty");
    let params = GrowParams {
        max_depth: config.max_depth,
        num_leaves: config.num_leaves,
        min_data_in_leaf: config.min_data_in_leaf,
    };

    let mut fitted = vec![base_score; n];
    let mut valid_pred = valid.map(|v| vec![base_score; v.len()]);
    let mut gradients = vec![0.0; n];
    let mut rows: Vec<u32> = Vec::with_capacity(n);
    let mut leaf_of = vec![0u32; n];
    let mut residuals: Vec<f64> = Vec::new();
    let mut trees = Vec::new();
    let mut log = FitLog {
        train_scores: vec![mean_pinball(&fitted, &train.y, tau)],
        ..FitLog::default()
    };
    let (mut best_score, mut best_iteration) = (f64::INFINITY, 0usize);

    for round in 0..config.num_iterations {
        for ((g, &f), &y) in gradients.iter_mut().zip(&fitted).zip(&train.y) {
            *g = if f - y >= 0.0 { 1.0 - tau } else { -tau };
        }
        rows.clear();
        let goss = match &config.goss {
            Some(g) => {
                let s = goss_sample(
                    &gradients,
                    g.top_fraction,
                    g.rest_fraction,
                    seed::derive(config.seed, "goss", round as u64),
                )?;
                rows.extend_from_slice(&s.indices);
                Some(s.weights)
            }
            None => {
                rows.extend(0..n as u32);
                None
            }
        };
        let (mut tree, ranges) = grow_tree(&bins, &mut rows, &gradients, goss.as_deref(), &params);
        if tree.nodes.len() == 1 {
            break;
        }

        // leaf membership of every training row
        if goss.is_some() {
            for (i, slot) in leaf_of.iter_mut().enumerate() {
                *slot = tree.leaf_index(train.x.row(i)) as u32;
            }
        } else {
            for r in &ranges {
                for &i in &rows[r.start..r.end] {
                    leaf_of[i as usize] = r.node as u32;
                }
            }
        }
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); tree.nodes.len()];
        for (i, &leaf) in leaf_of.iter().enumerate() {
            members[leaf as usize].push(i as u32);
        }
        for (node, rows_in_leaf) in members.iter().enumerate() {
            if rows_in_leaf.is_empty() {
                continue;
            }
            residuals.clear();
            residuals.extend(
                rows_in_leaf
                    .iter()
                    .map(|&i| train.y[i as usize] - fitted[i as usize]),
            );
            let value = select_quantile(&mut residuals, tau).expect("non-empty leaf");
            tree.nodes[node] = Node::Leaf { value };
        }
        for (f, &leaf) in fitted.iter_mut().zip(&leaf_of) {
            if let Node::Leaf { value } = tree.nodes[leaf as usize] {
                *f += lr * value;
            }
        }
        log.train_scores.push(mean_pinball(&fitted, &train.y, tau));

        let mut stop = false;
        if let (Some(v), Some(vp)) = (valid, valid_pred.as_mut()) {
            for (i, pred) in vp.iter_mut().enumerate() {
                *pred += lr * tree.predict(v.x.row(i));
            }
            let score = mean_pinball(vp, &v.y, tau);
            log.valid_scores.push(score);
            if score < best_score {
                best_score = score;
                best_iteration = round + 1;
            } else if config.early_stopping_round > 0
                && round + 1 - best_iteration >= config.early_stopping_round
            {
                stop = true;
            }
        }
        trees.push(tree);
        if stop {
            log.stopped_early = true;
            break;
        }
    }
    if valid.is_none() {
        best_iteration = trees.len();
    }
    let model = GbdtModel {
        config: *config,
        base_score,
        trees,
        feature_count: p,
        best_iteration,
    };
    Ok((model, log))
}
