use crate::error::{Error, Result};

/// Slack on the cumulative weight when inverting, so that sums like
/// `1/3 + 1/3 + 1/3` still reach `tau = 1`.
pub const CUMULATIVE_SLACK: f64 = 1e-12;

/// Discrete distribution with one atom per training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCDF {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedCDF {
    /// `atoms` need not be sorted; equal values keep their given order.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::EmptyInput("distribution"));
        }
        if atoms
            .iter()
            .any(|&(v, w)| !v.is_finite() || !(w >= 0.0 && w.is_finite()))
        {
            return Err(Error::InvalidArgument(
                "atoms need finite values and nonnegative weights".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, not 1"
            )));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted(atoms))
    }

    pub(crate) fn from_sorted(atoms: Vec<(f64, f64)>) -> Self {
        let (support, weights) = atoms.into_iter().unzip();
        WeightedCDF { support, weights }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `F(y)`, the weight of atoms `<= y`.
    pub fn cdf(&self, y: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .take_while(|(&v, _)| v <= y)
            .map(|(_, &w)| w)
            .sum()
    }

    /// Smallest support value whose cumulative weight reaches `tau`.
    pub fn quantile(&self, tau: f64) -> f64 {
        let mut cum = 0.0;
        for (&v, &w) in self.support.iter().zip(&self.weights) {
            cum += w;
            if cum >= tau - CUMULATIVE_SLACK {
                return v;
            }
        }
        *self.support.last().expect("non-empty support")
    }

    /// Quantiles at ascending or unordered `taus` in one pass per level.
    pub fn quantiles(&self, taus: &[f64]) -> Vec<f64> {
        taus.iter().map(|&t| self.quantile(t)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}
