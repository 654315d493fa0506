//! Glue from raw tables to model-ready samples.

use crate::data::{
    bilinear_regrid, generate_synthetic, GridField, GridSpec, StationRecord, SyntheticConfig,
    TruthOracle,
};
use crate::error::{Error, Result};
use crate::features::{build_samples, SampleSet};

fn common_spec(fields: &[GridField], what: &str) -> Result<Option<GridSpec>> {
    let Some(first) = fields.first() else {
        return Ok(None);
    };
    if fields.iter().any(|f| f.spec != first.spec) {
        return Err(Error::Data(format!("{what} fields use more than one grid")));
    }
    Ok(Some(first.spec))
}

/// Regrids the IMERG fields onto the PERSIANN grid, then builds samples.
pub fn prepare_samples(
    stations: &[StationRecord],
    persiann: &[GridField],
    imerg: &[GridField],
) -> Result<SampleSet> {
    let target = common_spec(persiann, "persiann")?.ok_or(Error::EmptyInput("persiann fields"))?;
    common_spec(imerg, "imerg")?.ok_or(Error::EmptyInput("imerg fields"))?;
    let regridded: Vec<GridField> = imerg.iter().map(|f| bilinear_regrid(f, target)).collect();
    build_samples(stations, persiann, &regridded)
}

/// Generates a synthetic dataset and turns it into samples.
pub fn synthetic_samples(config: &SyntheticConfig) -> Result<(SampleSet, TruthOracle)> {
    let data = generate_synthetic(config)?;
    let set = prepare_samples(&data.stations, &data.persiann, &data.imerg)?;
    Ok((set, data.truth))
}
