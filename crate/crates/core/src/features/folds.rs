use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Random partition of sample indices into folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub folds: Vec<u8>,
    pub n_folds: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn from_labels(folds: Vec<u8>, n_folds: usize, seed: u64) -> Result<Self> {
        if let Some(bad) = folds.iter().find(|&&f| usize::from(f) >= n_folds) {
            return Err(Error::Data(format!(
                "fold index {bad} outside 0..{n_folds}"
            )));
        }
        Ok(FoldAssignment {
            folds,
            n_folds,
            seed,
        })
    }

    pub fn indices(&self, fold: usize) -> Vec<usize> {
        self.folds
            .iter()
            .enumerate()
            .filter(|(_, &f)| usize::from(f) == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_folds];
        for &f in &self.folds {
            s[usize::from(f)] += 1;
        }
        s
    }
}

/// Fold sizes for `n` samples: the first `n % k` folds take one extra.
pub fn fold_sizes(n_samples: usize, n_folds: usize) -> Result<Vec<usize>> {
    if n_folds == 0 || n_folds > usize::from(u8::MAX) {
        return Err(Error::InvalidArgument(format!(
            "n_folds = {n_folds} out of range"
        )));
    }
    if n_samples < n_folds {
        return Err(Error::InvalidArgument(format!(
            "{n_samples} samples cannot fill {n_folds} folds"
        )));
    }
    let (base, rem) = (n_samples / n_folds, n_samples % n_folds);
    Ok((0..n_folds).map(|f| base + usize::from(f < rem)).collect())
}

/// Shuffles `0..n` and cuts the permutation into contiguous blocks of
/// [`fold_sizes`].
pub fn split_folds(n_samples: usize, n_folds: usize, seed: u64) -> Result<FoldAssignment> {
    let sizes = fold_sizes(n_samples, n_folds)?;
    let mut perm: Vec<usize> = (0..n_samples).collect();
    perm.shuffle(&mut seed::rng(seed, "folds", 0));
    let mut folds = vec![0u8; n_samples];
    let mut start = 0;
    for (f, &size) in sizes.iter().enumerate() {
        for &i in &perm[start..start + size] {
            folds[i] = f as u8;
        }
        start += size;
    }
    Ok(FoldAssignment {
        folds,
        n_folds,
        seed,
    })
}
