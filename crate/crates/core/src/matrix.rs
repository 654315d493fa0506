use crate::error::{Error, Result};
use crate::features::Sample;

/// Dense row-major predictor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_rows: usize,
    n_features: usize,
}

impl FeatureMatrix {
    pub fn new(data: Vec<f64>, n_features: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidArgument(
                "feature count must be positive".into(),
            ));
        }
        if data.len() % n_features != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form rows of {n_features} features",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value"));
        }
        Ok(FeatureMatrix {
            n_rows: data.len() / n_features,
            data,
            n_features,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * p);
        for r in rows {
            let r = r.as_ref();
            if r.len() != p {
                return Err(Error::FeatureMismatch {
                    expected: p,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        FeatureMatrix::new(data, p)
    }

    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a Sample>) -> Self {
        let mut data = Vec::new();
        for s in samples {
            data.extend_from_slice(&s.features.to_array());
        }
        let n_features = crate::features::N_FEATURES;
        FeatureMatrix {
            n_rows: data.len() / n_features,
            data,
            n_features,
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn get(&self, i: usize, feature: usize) -> f64 {
        self.data[i * self.n_features + feature]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_features)
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows().map(|r| r[feature]).collect()
    }

    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            data,
            n_rows: indices.len(),
            n_features: self.n_features,
        }
    }
}

/// Predictors with their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: FeatureMatrix,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: FeatureMatrix, y: Vec<f64>) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.n_rows(),
                right: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target"));
        }
        Ok(Dataset { x, y })
    }

    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a Sample> + Clone) -> Self {
        let x = FeatureMatrix::from_samples(samples.clone());
        let y = samples.into_iter().map(|s| s.target).collect();
        Dataset { x, y }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }
}
