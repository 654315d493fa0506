use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::features::{FoldAssignment, Sample};
use crate::matrix::Dataset;

pub const N_FOLDS: usize = 3;
pub const TRAIN_FOLD: usize = 0;
pub const VALID_FOLD: usize = 1;
pub const TEST_FOLD: usize = 2;

/// Fold-partitioned samples that count every row handed out per fold.
pub struct FoldStore<'a> {
    samples: &'a [Sample],
    members: Vec<Vec<usize>>,
    reads: Vec<AtomicUsize>,
}

impl<'a> FoldStore<'a> {
    pub fn new(samples: &'a [Sample], folds: &FoldAssignment) -> Result<Self> {
        if folds.folds.len() != samples.len() {
            return Err(Error::LengthMismatch {
                left: samples.len(),
                right: folds.folds.len(),
            });
        }
        let members: Vec<Vec<usize>> = (0..folds.n_folds).map(|f| folds.indices(f)).collect();
        if let Some(f) = members.iter().position(Vec::is_empty) {
            return Err(Error::Data(format!("fold {f} is empty")));
        }
        let reads = (0..folds.n_folds).map(|_| AtomicUsize::new(0)).collect();
        Ok(FoldStore {
            samples,
            members,
            reads,
        })
    }

    pub fn n_folds(&self) -> usize {
        self.members.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Samples of the listed folds, in fold then row order.
    pub fn samples(&self, folds: &[usize]) -> Vec<&'a Sample> {
        let mut out = Vec::new();
        for &f in folds {
            self.reads[f].fetch_add(self.members[f].len(), Ordering::Relaxed);
            out.extend(self.members[f].iter().map(|&i| &self.samples[i]));
        }
        out
    }

    pub fn dataset(&self, folds: &[usize]) -> Dataset {
        Dataset::from_samples(self.samples(folds))
    }

    /// Rows handed out so far, per fold.
    pub fn reads(&self) -> Vec<usize> {
        self.reads
            .iter()
            .map(|r| r.load(Ordering::Relaxed))
            .collect()
    }
}
