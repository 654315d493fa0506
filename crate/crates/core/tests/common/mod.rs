#![allow(dead_code)]

//! Exhaustive recomputations used as test oracles.

use quantmerge::gbdt::BinnedMatrix;
use quantmerge::qrf::{LeafMembership, QrfModel, QrfNode};
use quantmerge::{seed, FeatureMatrix};
use rand::Rng;

/// Best `(feature, bin, gain)` by enumerating every boundary and summing
/// the left child directly over the rows.
pub fn brute_gbdt_split(
    bins: &BinnedMatrix,
    rows: &[u32],
    grad: &[f64],
    min_data: usize,
) -> Option<(usize, u16, f64)> {
    let min_data = min_data.max(1);
    if rows.len() < 2 * min_data {
        return None;
    }
    let score = |g: f64, h: f64| if h > 0.0 { g * g / h } else { 0.0 };
    let g_all: f64 = rows.iter().map(|&i| grad[i as usize]).sum();
    let sq: f64 = rows
        .iter()
        .map(|&i| grad[i as usize] * grad[i as usize])
        .sum();
    let h_all = rows.len() as f64;
    let parent = score(g_all, h_all);
    let mut best: Option<(usize, u16, f64)> = None;
    for f in 0..bins.n_features() {
        let col = bins.column(f);
        for b in 0..bins.mappers[f].n_bins().saturating_sub(1) {
            let left: Vec<u32> = rows
                .iter()
                .copied()
                .filter(|&i| col[i as usize] <= b as u16)
                .collect();
            let nl = left.len();
            if nl < min_data || rows.len() - nl < min_data {
                continue;
            }
            let gl: f64 = left.iter().map(|&i| grad[i as usize]).sum();
            let gain = score(gl, nl as f64) + score(g_all - gl, h_all - nl as f64) - parent;
            if gain > 1e-10 * sq && best.is_none_or(|c| gain > c.2) {
                best = Some((f, b as u16, gain));
            }
        }
    }
    best
}

/// In-bag multiplicities of tree `t`, redrawn from the documented seed stream.
pub fn bootstrap_counts(model: &QrfModel, t: usize) -> Vec<u32> {
    let n = model.targets.len();
    if !model.config.bootstrap {
        return vec![1; n];
    }
    let mut rng = seed::rng(model.config.seed, "qrf-tree", t as u64);
    let mut c = vec![0u32; n];
    for _ in 0..n {
        c[rng.random_range(0..n)] += 1;
    }
    c
}

/// Forest weights from the definition: per tree, every training row routed
/// to the query's leaf gets `1/|leaf|` per in-bag copy; the total is divided
/// by the number of trees.
pub fn brute_qrf_weights(model: &QrfModel, x: &FeatureMatrix, query: &[f64]) -> Vec<f64> {
    let n = model.targets.len();
    let mut w = vec![0.0; n];
    for (t, tree) in model.trees.iter().enumerate() {
        let target = tree.leaf_of(query);
        let counts = match model.config.membership {
            LeafMembership::Full => vec![1; n],
            LeafMembership::InBag => bootstrap_counts(model, t),
        };
        let same: Vec<usize> = (0..n)
            .filter(|&i| counts[i] > 0 && tree.leaf_of(x.row(i)) == target)
            .collect();
        let share = 1.0 / f64::from(same.iter().map(|&i| counts[i]).sum::<u32>());
        for i in same {
            for _ in 0..counts[i] {
                w[i] += share;
            }
        }
    }
    let t = model.trees.len() as f64;
    w.iter().map(|v| v / t).collect()
}

/// Smallest target whose weighted cumulative share reaches `tau`.
pub fn brute_weighted_quantile(targets: &[f64], weights: &[f64], tau: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = targets
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&y, &w)| (y, w))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    for (y, w) in &atoms {
        cum += w;
        if cum >= tau - 1e-12 {
            return *y;
        }
    }
    atoms.last().expect("nonempty support").0
}

/// Best variance-reduction split of `rows` over every feature and midpoint.
pub fn brute_qrf_split(
    x: &FeatureMatrix,
    y: &[f64],
    rows: &[usize],
    min_node: usize,
) -> Option<(usize, f64)> {
    let n = rows.len() as f64;
    if rows.len() < 2 * min_node {
        return None;
    }
    let s: f64 = rows.iter().map(|&i| y[i]).sum();
    let sq: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
    let parent = s * s / n;
    let floor = 1e-10 * (sq - parent).max(0.0);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x.n_features() {
        let mut vals: Vec<f64> = rows.iter().map(|&i| x.get(i, f)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let mid = w[0] + (w[1] - w[0]) / 2.0;
            let thr = if mid >= w[0] && mid < w[1] { mid } else { w[0] };
            let left: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| x.get(i, f) <= thr)
                .collect();
            let nl = left.len();
            if nl < min_node || rows.len() - nl < min_node {
                continue;
            }
            let sl: f64 = left.iter().map(|&i| y[i]).sum();
            let gain = sl * sl / nl as f64 + (s - sl) * (s - sl) / (n - nl as f64) - parent;
            if gain > floor && best.is_none_or(|b| gain > b.2) {
                best = Some((f, thr, gain));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}

/// Walks a tree grown without bootstrap and with `mtry = p`, checking every
/// node against [`brute_qrf_split`]. Returns the first disagreement.
pub fn check_qrf_tree(
    model: &QrfModel,
    t: usize,
    x: &FeatureMatrix,
    y: &[f64],
) -> Result<(), String> {
    let tree = &model.trees[t];
    let mut stack = vec![(0usize, (0..y.len()).collect::<Vec<_>>())];
    while let Some((k, rows)) = stack.pop() {
        let expect = brute_qrf_split(x, y, &rows, model.config.min_node_size);
        match (tree.nodes[k], expect) {
            (
                QrfNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                },
                Some((f, thr)),
            ) => {
                if (feature, threshold) != (f, thr) {
                    return Err(format!("node {k}: split ({feature}, {threshold}) but exhaustive best is ({f}, {thr})"));
                }
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| x.get(i, f) <= thr);
                stack.push((right, r));
                stack.push((left, l));
            }
            (QrfNode::Leaf { leaf }, None) => {
                let mut m: Vec<usize> = tree
                    .leaf_members(leaf)
                    .iter()
                    .map(|&i| i as usize)
                    .collect();
                m.sort_unstable();
                if m != rows {
                    return Err(format!(
                        "leaf {leaf}: members {m:?} but routed rows {rows:?}"
                    ));
                }
            }
            (node, e) => {
                return Err(format!(
                    "node {k}: {node:?} but exhaustive search gives {e:?}"
                ))
            }
        }
    }
    Ok(())
}
