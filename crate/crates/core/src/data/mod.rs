//! Station and gridded-product ingestion, regridding and synthetic data.

mod grid;
mod regrid;
mod station;
pub mod synthetic;

pub use grid::{
    load_grid, load_grid_table, write_grid, GridField, GridSpec, GridSpecFile, GRID_COLUMNS,
};
pub use regrid::bilinear_regrid;
pub use station::{load_stations, write_stations, StationRecord, STATION_COLUMNS};
pub use synthetic::{
    generate_synthetic, write_truth, SyntheticConfig, SyntheticDataset, TruthOracle, IMERG,
    PERSIANN,
};

pub(crate) use station::{parse_date, parse_f64, reader, DATE_FORMAT};
