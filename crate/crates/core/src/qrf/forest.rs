use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cdf::WeightedCDF;
use super::config::{LeafMembership, QrfConfig};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::matrix::{Dataset, FeatureMatrix};
use crate::seed;

/// Splits must reduce the node's sum of squared deviations by more than
/// this share of it.
const MIN_RELATIVE_GAIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QrfNode {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: usize,
    },
}

/// A grown tree with the training indices held by each leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct QrfTree {
    pub nodes: Vec<QrfNode>,
    offsets: Vec<usize>,
    members: Vec<u32>,
}

impl QrfTree {
    pub fn from_parts(nodes: Vec<QrfNode>, leaves: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(leaves.len() + 1);
        offsets.push(0);
        let mut members = Vec::new();
        for l in leaves {
            members.extend_from_slice(l);
            offsets.push(members.len());
        }
        QrfTree {
            nodes,
            offsets,
            members,
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn leaf_members(&self, leaf: usize) -> &[u32] {
        &self.members[self.offsets[leaf]..self.offsets[leaf + 1]]
    }

    #[inline]
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                QrfNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    k = if x[feature] <= threshold { left } else { right };
                }
                QrfNode::Leaf { leaf } => return leaf,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrfModel {
    pub config: QrfConfig,
    pub trees: Vec<QrfTree>,
    pub targets: Vec<f64>,
    pub feature_count: usize,
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    counts: Vec<u32>,
    /// Per feature, the distinct in-bag rows sorted by that feature; every
    /// node owns the same range in all of them.
    order: Vec<Vec<u32>>,
    go_left: Vec<bool>,
    scratch: Vec<u32>,
    rng: ChaCha8Rng,
    mtry: usize,
    min_node_size: usize,
    nodes: Vec<QrfNode>,
    leaf_ranges: Vec<(usize, usize)>,
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_> {
    fn node_sums(&self, start: usize, end: usize) -> (f64, f64, f64) {
        let (mut n, mut s, mut sq) = (0.0, 0.0, 0.0);
        for &r in &self.order[0][start..end] {
            let (c, y) = (f64::from(self.counts[r as usize]), self.y[r as usize]);
            n += c;
            s += c * y;
            sq += c * y * y;
        }
        (n, s, sq)
    }

    fn best_split(&mut self, start: usize, end: usize) -> Option<Best> {
        let (n, s, sq) = self.node_sums(start, end);
        if n < (2 * self.min_node_size) as f64 {
            return None;
        }
        let parent = s * s / n;
        let floor = MIN_RELATIVE_GAIN * (sq - parent).max(0.0);
        let min = self.min_node_size as f64;
        let p = self.columns.len();
        let mut features = index::sample(&mut self.rng, p, self.mtry).into_vec();
        features.sort_unstable();

        let mut best: Option<Best> = None;
        for f in features {
            let col = &self.columns[f];
            let rows = &self.order[f][start..end];
            let (mut nl, mut sl) = (0.0, 0.0);
            for k in 0..rows.len() - 1 {
                let r = rows[k] as usize;
                let c = f64::from(self.counts[r]);
                nl += c;
                sl += c * self.y[r];
                if n - nl < min {
                    break;
                }
                let (a, b) = (col[r], col[rows[k + 1] as usize]);
                if nl < min || b <= a {
                    continue;
                }
                let sr = s - sl;
                let gain = sl * sl / nl + sr * sr / (n - nl) - parent;
                if gain > floor && best.as_ref().is_none_or(|c| gain > c.gain) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some(Best {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn partition(&mut self, start: usize, end: usize, best: &Best) -> usize {
        let col = &self.columns[best.feature];
        for &r in &self.order[best.feature][start..end] {
            self.go_left[r as usize] = col[r as usize] <= best.threshold;
        }
        let mut mid = start;
        for ord in &mut self.order {
            let slice = &mut ord[start..end];
            self.scratch.clear();
            let mut nl = 0;
            for i in 0..slice.len() {
                let r = slice[i];
                if self.go_left[r as usize] {
                    slice[nl] = r;
                    nl += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            slice[nl..].copy_from_slice(&self.scratch);
            mid = start + nl;
        }
        mid
    }

    fn grow(&mut self) {
        self.nodes.push(QrfNode::Leaf { leaf: 0 });
        let mut stack = vec![(0usize, 0usize, self.order[0].len())];
        while let Some((node, start, end)) = stack.pop() {
            match self.best_split(start, end) {
                Some(best) => {
                    let mid = self.partition(start, end, &best);
                    let (left, right) = (self.nodes.len(), self.nodes.len() + 1);
                    self.nodes.push(QrfNode::Leaf { leaf: 0 });
                    self.nodes.push(QrfNode::Leaf { leaf: 0 });
                    self.nodes[node] = QrfNode::Split {
                        feature: best.feature,
                        threshold: best.threshold,
                        left,
                        right,
                    };
                    stack.push((right, mid, end));
                    stack.push((left, start, mid));
                }
                None => {
                    self.nodes[node] = QrfNode::Leaf {
                        leaf: self.leaf_ranges.len(),
                    };
                    self.leaf_ranges.push((start, end));
                }
            }
        }
    }
}

fn grow_tree(
    columns: &[Vec<f64>],
    sorted: &[Vec<u32>],
    y: &[f64],
    config: &QrfConfig,
    t: usize,
) -> QrfTree {
    let n = y.len();
    let mut rng = seed::rng(config.seed, "qrf-tree", t as u64);
    let mut counts = vec![0u32; n];
    if config.bootstrap {
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1;
        }
    } else {
        counts.fill(1);
    }
    let order = sorted
        .iter()
        .map(|o| {
            o.iter()
                .copied()
                .filter(|&r| counts[r as usize] > 0)
                .collect()
        })
        .collect();
    let mut g = Grower {
        columns,
        y,
        counts,
        order,
        go_left: vec![false; n],
        scratch: Vec::new(),
        rng,
        mtry: config.mtry,
        min_node_size: config.min_node_size,
        nodes: Vec::new(),
        leaf_ranges: Vec::new(),
    };
    g.grow();

    let mut leaves: Vec<Vec<u32>> = vec![Vec::new(); g.leaf_ranges.len()];
    let tree = QrfTree::from_parts(g.nodes, &[]);
    match config.membership {
        LeafMembership::Full => {
            let mut x = vec![0.0; columns.len()];
            for i in 0..n {
                for (v, col) in x.iter_mut().zip(columns) {
                    *v = col[i];
                }
                leaves[tree.leaf_of(&x)].push(i as u32);
            }
        }
        LeafMembership::InBag => {
            for (leaf, &(start, end)) in leaves.iter_mut().zip(&g.leaf_ranges) {
                let mut rows = g.order[0][start..end].to_vec();
                rows.sort_unstable();
                for r in rows {
                    leaf.extend(std::iter::repeat_n(r, g.counts[r as usize] as usize));
                }
            }
        }
    }
    QrfTree::from_parts(tree.nodes, &leaves)
}

/// Grows `n_trees` variance-reduction trees, each on its own bootstrap
/// resample with `mtry` candidate features per node, then records which
/// training samples fall in every leaf.
pub fn fit_qrf(train: &Dataset, config: &QrfConfig) -> Result<QrfModel> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if train.len() > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many training samples".into()));
    }
    let p = train.x.n_features();
    config.validate(p)?;
    let columns: Vec<Vec<f64>> = (0..p).map(|f| train.x.column(f)).collect();
    let sorted: Vec<Vec<u32>> = columns
        .iter()
        .map(|col| {
            let mut o: Vec<u32> = (0..train.len() as u32).collect();
            o.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            o
        })
        .collect();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(&columns, &sorted, &train.y, config, t))
        .collect();
    Ok(QrfModel {
        config: *config,
        trees,
        targets: train.y.clone(),
        feature_count: p,
    })
}

impl QrfModel {
    pub fn n_train(&self) -> usize {
        self.targets.len()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_count {
            return Err(Error::FeatureMismatch {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Nonzero weights as `(training index, weight)` in index order.
    fn sparse_weights(&self, x: &[f64]) -> Vec<(u32, f64)> {
        let mut hits: Vec<(u32, f64)> = Vec::new();
        for t in &self.trees {
            let m = t.leaf_members(t.leaf_of(x));
            let w = 1.0 / m.len() as f64;
            hits.extend(m.iter().map(|&i| (i, w)));
        }
        hits.sort_by_key(|h| h.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(hits.len());
        for (i, w) in hits {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        let n_trees = self.trees.len() as f64;
        for m in &mut merged {
            m.1 /= n_trees;
        }
        merged
    }

    /// Weight of every training sample for query `x`.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut w = vec![0.0; self.n_train()];
        for (i, v) in self.sparse_weights(x) {
            w[i as usize] = v;
        }
        Ok(w)
    }

    pub fn cdf(&self, x: &[f64]) -> Result<WeightedCDF> {
        self.check(x)?;
        let mut atoms: Vec<(f64, f64)> = self
            .sparse_weights(x)
            .into_iter()
            .map(|(i, w)| (self.targets[i as usize], w))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(WeightedCDF::from_sorted(atoms))
    }

    pub fn predict_quantile(&self, x: &[f64], tau: f64) -> Result<f64> {
        Ok(self.cdf(x)?.quantile(tau))
    }

    pub fn predict_quantiles(&self, x: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
        Ok(self.cdf(x)?.quantiles(taus))
    }

    pub fn predict_features(&self, features: &FeatureVector, tau: f64) -> Result<f64> {
        self.predict_quantile(&features.to_array(), tau)
    }

    /// Row `i` holds the quantiles of query `i` at `taus`.
    pub fn predict(&self, x: &FeatureMatrix, taus: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.n_features() != self.feature_count {
            return Err(Error::FeatureMismatch {
                expected: self.feature_count,
                got: x.n_features(),
            });
        }
        (0..x.n_rows())
            .into_par_iter()
            .map(|i| self.predict_quantiles(x.row(i), taus))
            .collect()
    }

    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        Ok(self.cdf(x)?.mean())
    }
}

/// Dense weight vector for `x`.
pub fn qrf_weights(model: &QrfModel, x: &[f64]) -> Result<Vec<f64>> {
    model.weights(x)
}
