use super::binning::BinnedMatrix;
use super::histogram::{Histogram, NodeStats, SplitCandidate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub depth: usize,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
            depth: 0,
        }
    }

    /// Index of the leaf node reached by `x`.
    #[inline]
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    k = if x[feature] <= threshold { left } else { right };
                }
                Node::Leaf { .. } => return k,
            }
        }
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&k| matches!(self.nodes[k], Node::Leaf { .. }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub num_leaves: usize,
    pub min_data_in_leaf: usize,
}

struct Frontier {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
    stats: NodeStats,
    hist: Option<Histogram>,
    best: Option<SplitCandidate>,
}

impl Frontier {
    fn evaluate(&mut self, params: &GrowParams) {
        let splittable =
            self.depth < params.max_depth && self.stats.count >= 2 * params.min_data_in_leaf;
        self.best = match (&self.hist, splittable) {
            (Some(h), true) => h.best_split(&self.stats, params.min_data_in_leaf),
            _ => None,
        };
        if self.best.is_none() {
            self.hist = None;
        }
    }
}

/// Rows `start..end` of the growth buffer ended in leaf `node`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LeafRange {
    pub node: usize,
    pub start: usize,
    pub end: usize,
}

/// Best-first growth: repeatedly splits the frontier leaf with the largest
/// gain until `num_leaves` is reached or no leaf has a positive-gain split.
/// Leaf values are left at zero for the caller to fill in.
pub(crate) fn grow_tree(
    bins: &BinnedMatrix,
    rows: &mut [u32],
    gradients: &[f64],
    weights: Option<&[f64]>,
    params: &GrowParams,
) -> (Tree, Vec<LeafRange>) {
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let root_stats = NodeStats::from_indices(rows, gradients, weights);
    let root_hist = (root_stats.count >= 2 * params.min_data_in_leaf)
        .then(|| Histogram::build(bins, rows, gradients, weights));
    let mut root = Frontier {
        node: 0,
        start: 0,
        end: rows.len(),
        depth: 0,
        stats: root_stats,
        hist: root_hist,
        best: None,
    };
    root.evaluate(params);
    let mut frontier = vec![root];
    let mut n_leaves = 1;
    let mut depth = 0;
    let mut scratch: Vec<u32> = Vec::with_capacity(rows.len());

    while n_leaves < params.num_leaves {
        // largest gain, ties to the lowest node id
        let mut pick: Option<usize> = None;
        for (k, leaf) in frontier.iter().enumerate() {
            if let Some(c) = leaf.best {
                let better = pick.is_none_or(|p| {
                    let b = frontier[p].best.map_or(f64::NEG_INFINITY, |b| b.gain);
                    c.gain > b || (c.gain == b && leaf.node < frontier[p].node)
                });
                if better {
                    pick = Some(k);
                }
            }
        }
        let Some(k) = pick else { break };
        let leaf = frontier.swap_remove(k);
        let split = leaf.best.expect("picked leaf has a split");

        let col = bins.column(split.feature);
        let slice = &mut rows[leaf.start..leaf.end];
        scratch.clear();
        let mut n_left = 0;
        for i in 0..slice.len() {
            let r = slice[i];
            if col[r as usize] <= split.bin {
                slice[n_left] = r;
                n_left += 1;
            } else {
                scratch.push(r);
            }
        }
        slice[n_left..].copy_from_slice(&scratch);
        let mid = leaf.start + n_left;

        let (left_id, right_id) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[leaf.node] = Node::Split {
            feature: split.feature,
            threshold: bins.mappers[split.feature].threshold(split.bin),
            left: left_id,
            right: right_id,
        };
        let child_depth = leaf.depth + 1;
        depth = depth.max(child_depth);
        n_leaves += 1;

        let left_rows = &rows[leaf.start..mid];
        let right_rows = &rows[mid..leaf.end];
        let mut left = Frontier {
            node: left_id,
            start: leaf.start,
            end: mid,
            depth: child_depth,
            stats: NodeStats::from_indices(left_rows, gradients, weights),
            hist: None,
            best: None,
        };
        let mut right = Frontier {
            node: right_id,
            start: mid,
            end: leaf.end,
            depth: child_depth,
            stats: NodeStats::from_indices(right_rows, gradients, weights),
            hist: None,
            best: None,
        };
        if child_depth < params.max_depth && n_leaves < params.num_leaves {
            let parent_hist = leaf.hist.expect("split leaf keeps its histogram");
            let want = |s: &NodeStats| s.count >= 2 * params.min_data_in_leaf;
            match (want(&left.stats), want(&right.stats)) {
                (false, false) => {}
                (true, false) => {
                    left.hist = Some(Histogram::build(bins, left_rows, gradients, weights))
                }
                (false, true) => {
                    right.hist = Some(Histogram::build(bins, right_rows, gradients, weights))
                }
                (true, true) => {
                    if left_rows.len() <= right_rows.len() {
                        let h = Histogram::build(bins, left_rows, gradients, weights);
                        right.hist = Some(parent_hist.subtract(&h));
                        left.hist = Some(h);
                    } else {
                        let h = Histogram::build(bins, right_rows, gradients, weights);
                        left.hist = Some(parent_hist.subtract(&h));
                        right.hist = Some(h);
                    }
                }
            }
            left.evaluate(params);
            right.evaluate(params);
        }
        frontier.push(left);
        frontier.push(right);
    }
    let ranges = frontier
        .iter()
        .map(|f| LeafRange {
            node: f.node,
            start: f.start,
            end: f.end,
        })
        .collect();
    (Tree { nodes, depth }, ranges)
}
