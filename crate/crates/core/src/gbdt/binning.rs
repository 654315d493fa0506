use crate::matrix::FeatureMatrix;

/// Upper bin boundaries for one feature. Value `x` falls in the first bin
/// `b` with `x <= upper[b]`; the last boundary is `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMapper {
    upper: Vec<f64>,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= a && m < b {
        m
    } else {
        a
    }
}

impl BinMapper {
    /// Boundaries at training-value quantiles: with few distinct values every
    /// value gets its own bin, otherwise bins hold roughly equal counts.
    pub fn fit(values: &[f64], max_bins: usize) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let mut distinct: Vec<(f64, usize)> = Vec::new();
        for v in sorted {
            match distinct.last_mut() {
                Some((last, count)) if *last == v => *count += 1,
                _ => distinct.push((v, 1)),
            }
        }
        let mut upper = Vec::new();
        if distinct.len() <= max_bins {
            for w in distinct.windows(2) {
                upper.push(midpoint(w[0].0, w[1].0));
            }
        } else {
            let n = values.len() as f64;
            let per_bin = n / max_bins as f64;
            let mut seen = 0usize;
            let mut next_cut = per_bin;
            for w in distinct.windows(2) {
                seen += w[0].1;
                if seen as f64 >= next_cut && upper.len() + 1 < max_bins {
                    upper.push(midpoint(w[0].0, w[1].0));
                    while next_cut <= seen as f64 {
                        next_cut += per_bin;
                    }
                }
            }
        }
        upper.push(f64::INFINITY);
        BinMapper { upper }
    }

    #[inline]
    pub fn n_bins(&self) -> usize {
        self.upper.len()
    }

    #[inline]
    pub fn bin(&self, x: f64) -> u16 {
        self.upper
            .partition_point(|&u| u < x)
            .min(self.upper.len() - 1) as u16
    }

    /// Real-valued split threshold for "bins `0..=bin` go left".
    #[inline]
    pub fn threshold(&self, bin: u16) -> f64 {
        self.upper[usize::from(bin)]
    }
}

/// Column-major bin indices for a training matrix.
#[derive(Debug, Clone)]
pub struct BinnedMatrix {
    pub mappers: Vec<BinMapper>,
    bins: Vec<u16>,
    n_rows: usize,
}

impl BinnedMatrix {
    pub fn new(x: &FeatureMatrix, max_bins: usize) -> Self {
        let n = x.n_rows();
        let mut mappers = Vec::with_capacity(x.n_features());
        let mut bins = Vec::with_capacity(n * x.n_features());
        for f in 0..x.n_features() {
            let col = x.column(f);
            let m = BinMapper::fit(&col, max_bins);
            bins.extend(col.iter().map(|&v| m.bin(v)));
            mappers.push(m);
        }
        BinnedMatrix {
            mappers,
            bins,
            n_rows: n,
        }
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.mappers.len()
    }

    #[inline]
    pub fn column(&self, feature: usize) -> &[u16] {
        &self.bins[feature * self.n_rows..(feature + 1) * self.n_rows]
    }
}
