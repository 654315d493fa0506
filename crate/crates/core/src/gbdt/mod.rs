//! Histogram-based gradient-boosted trees on the pinball loss.

pub mod binning;
mod booster;
mod config;
pub mod goss;
pub mod histogram;
mod io;
mod tree;

pub use binning::{BinMapper, BinnedMatrix};
pub use booster::{fit_quantile_gbdt, fit_quantile_gbdt_logged, FitLog, GbdtModel};
pub use config::{GbdtConfig, GossConfig, DEFAULT_BINS};
pub use goss::{goss_sample, GossSample};
pub use histogram::{build_histogram_and_split, SplitCandidate};
pub(crate) use io::{check_tree, Lines};
pub use io::{gbdt_from_str, gbdt_to_string, load_gbdt, save_gbdt, GBDT_MAGIC};
pub use tree::{Node, Tree};
