//! Quantile-regression tree ensembles for merging gridded satellite
//! precipitation with gauge measurements.
//!
//! Two learners are provided: histogram-based gradient-boosted trees trained
//! on the pinball loss ([`gbdt`]) and quantile regression forests ([`qrf`]).
//! [`data`] and [`features`] turn station tables and product grids into
//! nineteen-predictor samples, [`experiment`] runs the fold protocol and
//! [`scoring`] holds the verification scores.

pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod features;
pub mod gbdt;
pub mod matrix;
pub mod pipeline;
pub mod qrf;
pub mod quantile;
pub mod scoring;
pub mod seed;

pub use error::{Error, Result};
pub use matrix::{Dataset, FeatureMatrix};
pub use scoring::QuantileLevel;
