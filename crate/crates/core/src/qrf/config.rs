use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which training samples populate the leaves used for weighting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafMembership {
    /// Every original training sample, routed down the grown tree.
    #[default]
    Full,
    /// Only the tree's bootstrap sample, with multiplicity.
    InBag,
}

impl LeafMembership {
    pub fn as_str(self) -> &'static str {
        match self {
            LeafMembership::Full => "full",
            LeafMembership::InBag => "in_bag",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(LeafMembership::Full),
            "in_bag" => Some(LeafMembership::InBag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QrfConfig {
    pub n_trees: usize,
    /// Features tried at each split.
    pub mtry: usize,
    pub min_node_size: usize,
    pub seed: u64,
    pub membership: LeafMembership,
    /// Resample the training set per tree. Disable only for testing.
    pub bootstrap: bool,
}

impl Default for QrfConfig {
    fn default() -> Self {
        QrfConfig {
            n_trees: 100,
            mtry: 4,
            min_node_size: 5,
            seed: 0,
            membership: LeafMembership::Full,
            bootstrap: true,
        }
    }
}

impl QrfConfig {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 || self.mtry == 0 || self.min_node_size == 0 {
            return Err(Error::InvalidArgument(
                "n_trees, mtry and min_node_size must be positive".into(),
            ));
        }
        if self.mtry > n_features {
            return Err(Error::InvalidArgument(format!(
                "mtry = {} exceeds {n_features} features",
                self.mtry
            )));
        }
        Ok(())
    }
}
