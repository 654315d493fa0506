//! Regression samples: nineteen predictors per station-day plus the gauge target.

mod folds;
mod nearest;
mod samples;
mod table;

pub use folds::{fold_sizes, split_folds, FoldAssignment};
pub use nearest::{haversine_km, nearest_grid_points, NearestCell, EARTH_RADIUS_KM};
pub use samples::{build_samples, BuildSummary, Sample, SampleSet};
pub use table::{load_samples, write_samples, SampleTable, FOLD_COLUMN};

pub const N_NEIGHBOURS: usize = 4;
pub const N_FEATURES: usize = 19;

/// Predictor column names, in model input order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "persiann_value_1",
    "persiann_value_2",
    "persiann_value_3",
    "persiann_value_4",
    "imerg_value_1",
    "imerg_value_2",
    "imerg_value_3",
    "imerg_value_4",
    "persiann_distance_1",
    "persiann_distance_2",
    "persiann_distance_3",
    "persiann_distance_4",
    "imerg_distance_1",
    "imerg_distance_2",
    "imerg_distance_3",
    "imerg_distance_4",
    "longitude",
    "latitude",
    "elevation",
];

/// Values at the four closest cells of each product (paired index-wise with
/// the distances, which ascend), then station location and elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub persiann_values: [f64; N_NEIGHBOURS],
    pub imerg_values: [f64; N_NEIGHBOURS],
    pub persiann_distances: [f64; N_NEIGHBOURS],
    pub imerg_distances: [f64; N_NEIGHBOURS],
    pub longitude: f64,
    pub latitude: f64,
    pub elevation: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        let mut out = [0.0; N_FEATURES];
        out[0..4].copy_from_slice(&self.persiann_values);
        out[4..8].copy_from_slice(&self.imerg_values);
        out[8..12].copy_from_slice(&self.persiann_distances);
        out[12..16].copy_from_slice(&self.imerg_distances);
        out[16] = self.longitude;
        out[17] = self.latitude;
        out[18] = self.elevation;
        out
    }

    pub fn from_array(a: &[f64; N_FEATURES]) -> Self {
        let four = |k: usize| [a[k], a[k + 1], a[k + 2], a[k + 3]];
        FeatureVector {
            persiann_values: four(0),
            imerg_values: four(4),
            persiann_distances: four(8),
            imerg_distances: four(12),
            longitude: a[16],
            latitude: a[17],
            elevation: a[18],
        }
    }

    pub fn distances_ordered(&self) -> bool {
        let asc = |d: &[f64; 4]| d.windows(2).all(|w| w[0] <= w[1]) && d[0] >= 0.0;
        asc(&self.persiann_distances) && asc(&self.imerg_distances)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_layout_follows_column_names() {
        let a: [f64; N_FEATURES] = std::array::from_fn(|k| k as f64);
        let fv = FeatureVector::from_array(&a);
        assert_eq!(fv.imerg_values[0], 4.0);
        assert_eq!(fv.persiann_distances[3], 11.0);
        assert_eq!(fv.elevation, 18.0);
        assert_eq!(fv.to_array(), a);
        assert_eq!(FEATURE_NAMES[16], "longitude");
    }
}
