//! Quantile regression forests.

mod cdf;
mod config;
mod forest;
mod io;

pub use cdf::{WeightedCDF, CUMULATIVE_SLACK};
pub use config::{LeafMembership, QrfConfig};
pub use forest::{fit_qrf, qrf_weights, QrfModel, QrfNode, QrfTree};
pub use io::{load_qrf, qrf_from_str, qrf_to_string, save_qrf, QRF_MAGIC};
