use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::nearest::{nearest_grid_points, NearestCell};
use super::{FeatureVector, N_NEIGHBOURS};
use crate::data::{GridField, GridSpec, StationRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    pub target: f64,
    pub station_id: String,
    pub date: NaiveDate,
}

/// Station-days removed during sample construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub station_days: usize,
    pub retained: usize,
    /// No field for the product on that date.
    pub dropped_missing_field: usize,
    /// A selected cell was missing.
    pub dropped_missing_value: usize,
}

impl BuildSummary {
    pub fn dropped(&self) -> usize {
        self.dropped_missing_field + self.dropped_missing_value
    }
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub summary: BuildSummary,
}

fn by_date<'a>(fields: &'a [GridField], what: &str) -> Result<HashMap<NaiveDate, &'a GridField>> {
    let mut map = HashMap::with_capacity(fields.len());
    for f in fields {
        if map.insert(f.date, f).is_some() {
            return Err(Error::Data(format!(
                "{what}: more than one field for {}",
                f.date
            )));
        }
    }
    Ok(map)
}

type NeighbourCache = HashMap<(u64, u64, u64, u64, usize, usize), Vec<NearestCell>>;

fn neighbours<'c>(
    cache: &'c mut NeighbourCache,
    r: &StationRecord,
    spec: &GridSpec,
) -> Result<&'c [NearestCell]> {
    let key = (
        r.longitude.to_bits(),
        r.latitude.to_bits(),
        spec.origin_longitude.to_bits() ^ spec.cell_size.to_bits().rotate_left(17),
        spec.origin_latitude.to_bits(),
        spec.n_lon,
        spec.n_lat,
    );
    if !cache.contains_key(&key) {
        let cells = nearest_grid_points(r.longitude, r.latitude, spec, N_NEIGHBOURS)?;
        cache.insert(key, cells);
    }
    Ok(&cache[&key])
}

fn gather(
    field: &GridField,
    cells: &[NearestCell],
) -> Option<([f64; N_NEIGHBOURS], [f64; N_NEIGHBOURS])> {
    let mut values = [0.0; N_NEIGHBOURS];
    let mut dists = [0.0; N_NEIGHBOURS];
    for (k, c) in cells.iter().enumerate() {
        values[k] = field.get(c.index)?;
        dists[k] = c.distance_km;
    }
    Some((values, dists))
}

/// One sample per station-day whose predictors are all present. Fields must
/// already sit on their final (regridded) grids.
pub fn build_samples(
    stations: &[StationRecord],
    persiann_fields: &[GridField],
    imerg_fields: &[GridField],
) -> Result<SampleSet> {
    let persiann = by_date(persiann_fields, "persiann")?;
    let imerg = by_date(imerg_fields, "imerg")?;
    let station_dates: HashSet<NaiveDate> = stations.iter().map(|r| r.date).collect();
    let overlap = station_dates
        .iter()
        .any(|d| persiann.contains_key(d) && imerg.contains_key(d));
    if !stations.is_empty() && !overlap {
        return Err(Error::Data(
            "no dates shared by stations and both products".into(),
        ));
    }

    let mut cache = NeighbourCache::new();
    let mut summary = BuildSummary {
        station_days: stations.len(),
        ..BuildSummary::default()
    };
    let mut samples = Vec::with_capacity(stations.len());
    for r in stations {
        let (Some(pf), Some(imf)) = (persiann.get(&r.date), imerg.get(&r.date)) else {
            summary.dropped_missing_field += 1;
            continue;
        };
        let p = gather(pf, neighbours(&mut cache, r, &pf.spec)?);
        let i = gather(imf, neighbours(&mut cache, r, &imf.spec)?);
        let (Some((pv, pd)), Some((iv, id))) = (p, i) else {
            summary.dropped_missing_value += 1;
            continue;
        };
        samples.push(Sample {
            features: FeatureVector {
                persiann_values: pv,
                imerg_values: iv,
                persiann_distances: pd,
                imerg_distances: id,
                longitude: r.longitude,
                latitude: r.latitude,
                elevation: r.elevation,
            },
            target: r.precipitation,
            station_id: r.station_id.clone(),
            date: r.date,
        });
    }
    summary.retained = samples.len();
    Ok(SampleSet { samples, summary })
}
