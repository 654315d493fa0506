//! Per-bin gradient histograms and the split scan over them.

use super::binning::BinnedMatrix;

/// Splits whose gain does not exceed this share of the node's weighted
/// squared-gradient sum (an upper bound on any split gain) count as zero gain.
pub const MIN_RELATIVE_GAIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinStat {
    pub grad: f64,
    pub weight: f64,
    pub count: u32,
}

impl BinStat {
    #[inline]
    fn add(&mut self, o: &BinStat) {
        self.grad += o.grad;
        self.weight += o.weight;
        self.count += o.count;
    }
}

/// Totals over the samples of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeStats {
    pub grad: f64,
    pub weight: f64,
    pub grad_sq: f64,
    pub count: usize,
}

impl NodeStats {
    pub fn from_indices(indices: &[u32], gradients: &[f64], weights: Option<&[f64]>) -> Self {
        let mut s = NodeStats {
            count: indices.len(),
            ..NodeStats::default()
        };
        for &i in indices {
            let i = i as usize;
            let w = weights.map_or(1.0, |w| w[i]);
            let g = gradients[i];
            s.grad += w * g;
            s.weight += w;
            s.grad_sq += w * g * g;
        }
        s
    }

    /// Squared-gradient-sum score `G^2 / H` under unit curvature.
    #[inline]
    pub fn score(grad: f64, weight: f64) -> f64 {
        if weight > 0.0 {
            grad * grad / weight
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    /// Bins `0..=bin` go left.
    pub bin: u16,
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct Histogram {
    stats: Vec<BinStat>,
    offsets: Vec<usize>,
}

impl Histogram {
    pub fn build(
        bins: &BinnedMatrix,
        indices: &[u32],
        gradients: &[f64],
        weights: Option<&[f64]>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(bins.n_features() + 1);
        offsets.push(0);
        for m in &bins.mappers {
            offsets.push(offsets.last().unwrap() + m.n_bins());
        }
        let mut stats = vec![BinStat::default(); *offsets.last().unwrap()];
        for f in 0..bins.n_features() {
            let col = bins.column(f);
            let h = &mut stats[offsets[f]..offsets[f + 1]];
            match weights {
                None => {
                    for &i in indices {
                        let i = i as usize;
                        let s = &mut h[usize::from(col[i])];
                        s.grad += gradients[i];
                        s.weight += 1.0;
                        s.count += 1;
                    }
                }
                Some(w) => {
                    for &i in indices {
                        let i = i as usize;
                        let s = &mut h[usize::from(col[i])];
                        s.grad += w[i] * gradients[i];
                        s.weight += w[i];
                        s.count += 1;
                    }
                }
            }
        }
        Histogram { stats, offsets }
    }

    /// `self - child`, the histogram of the sibling.
    pub fn subtract(&self, child: &Histogram) -> Histogram {
        let stats = self
            .stats
            .iter()
            .zip(&child.stats)
            .map(|(p, c)| BinStat {
                grad: p.grad - c.grad,
                weight: p.weight - c.weight,
                count: p.count - c.count,
            })
            .collect();
        Histogram {
            stats,
            offsets: self.offsets.clone(),
        }
    }

    pub fn feature(&self, f: usize) -> &[BinStat] {
        &self.stats[self.offsets[f]..self.offsets[f + 1]]
    }

    /// Best boundary over all features by
    /// `G_L^2/H_L + G_R^2/H_R - G^2/H`, both children holding at least
    /// `min_data_in_leaf` samples. Ties keep the lowest feature, then the
    /// lowest bin.
    pub fn best_split(&self, node: &NodeStats, min_data_in_leaf: usize) -> Option<SplitCandidate> {
        let parent = NodeStats::score(node.grad, node.weight);
        let floor = MIN_RELATIVE_GAIN * node.grad_sq;
        let mut best: Option<SplitCandidate> = None;
        for f in 0..self.offsets.len() - 1 {
            let h = self.feature(f);
            let mut left = BinStat::default();
            for (b, s) in h.iter().enumerate().take(h.len().saturating_sub(1)) {
                left.add(s);
                let lc = left.count as usize;
                if lc < min_data_in_leaf {
                    continue;
                }
                if node.count - lc < min_data_in_leaf {
                    break;
                }
                let (rg, rw) = (node.grad - left.grad, node.weight - left.weight);
                let gain =
                    NodeStats::score(left.grad, left.weight) + NodeStats::score(rg, rw) - parent;
                if gain > floor && best.is_none_or(|c| gain > c.gain) {
                    best = Some(SplitCandidate {
                        feature: f,
                        bin: b as u16,
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Histogram construction and split scan for one node.
pub fn build_histogram_and_split(
    indices: &[u32],
    gradients: &[f64],
    weights: Option<&[f64]>,
    bins: &BinnedMatrix,
    min_data_in_leaf: usize,
) -> Option<SplitCandidate> {
    if indices.len() < 2 * min_data_in_leaf.max(1) {
        return None;
    }
    let node = NodeStats::from_indices(indices, gradients, weights);
    Histogram::build(bins, indices, gradients, weights).best_split(&node, min_data_in_leaf)
}
