//! Synthetic intermittent precipitation with a known conditional quantile.
//!
//! A latent daily field `L(lon, lat, day)` (a sum of random plane waves with
//! unit variance) drives both the gauges and the satellite products:
//!
//! * gauge: `0` with probability `zero_probability`, otherwise lognormal with
//!   `log y = log_mean + latent_loading * L + elevation_loading * elev_km + sd(L) * Z`
//!   where `sd(L) = log_sd * exp(sd_loading * L)`;
//! * product: `max(0, exp(bias + sensitivity * L_smooth + noise_sd * e) - 1)`
//!   where `L_smooth` averages the latent field over the cell footprint.
//!
//! Given the latent field the gauge distribution is explicit, so
//! [`TruthOracle::quantile`] is exact.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::grid::{GridField, GridSpec};
use super::station::{StationRecord, DATE_FORMAT};
use crate::error::{Error, Result};
use crate::seed;

pub const PERSIANN: &str = "persiann";
pub const IMERG: &str = "imerg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProductNoise {
    pub bias: f64,
    pub sensitivity: f64,
    pub noise_sd: f64,
    /// Fraction of cells dropped at random on each day.
    pub missing_fraction: f64,
}

impl Default for ProductNoise {
    fn default() -> Self {
        ProductNoise {
            bias: 1.0,
            sensitivity: 1.0,
            noise_sd: 0.4,
            missing_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_stations: usize,
    pub n_days: usize,
    pub start_date: NaiveDate,
    /// Coarse product grid; stations are placed inside it.
    pub persiann_grid: GridSpec,
    /// Fine product grid, regridded onto `persiann_grid` before feature construction.
    pub imerg_grid: GridSpec,
    pub zero_probability: f64,
    pub log_mean: f64,
    pub latent_loading: f64,
    pub elevation_loading: f64,
    pub log_sd: f64,
    pub sd_loading: f64,
    pub n_modes: usize,
    pub min_wavelength: f64,
    pub max_wavelength: f64,
    pub persiann: ProductNoise,
    pub imerg: ProductNoise,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 20230101,
            n_stations: 50,
            n_days: 60,
            start_date: NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date"),
            persiann_grid: GridSpec {
                origin_longitude: -104.875,
                origin_latitude: 35.125,
                cell_size: 0.25,
                n_lon: 32,
                n_lat: 20,
            },
            imerg_grid: GridSpec {
                origin_longitude: -105.05,
                origin_latitude: 34.95,
                cell_size: 0.1,
                n_lon: 83,
                n_lat: 53,
            },
            zero_probability: 0.72,
            log_mean: 1.0,
            latent_loading: 0.8,
            elevation_loading: -0.2,
            log_sd: 0.8,
            sd_loading: 0.25,
            n_modes: 8,
            min_wavelength: 2.0,
            max_wavelength: 10.0,
            persiann: ProductNoise {
                noise_sd: 0.5,
                ..ProductNoise::default()
            },
            imerg: ProductNoise {
                noise_sd: 0.35,
                ..ProductNoise::default()
            },
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(0.0..=1.0).contains(&self.zero_probability) {
            return bad(format!(
                "zero_probability {} not in [0, 1]",
                self.zero_probability
            ));
        }
        if self.n_stations == 0 || self.n_days == 0 || self.n_modes == 0 {
            return bad("n_stations, n_days and n_modes must be positive".into());
        }
        self.persiann_grid.validate()?;
        self.imerg_grid.validate()?;
        if self.persiann_grid.n_lon < 2 || self.persiann_grid.n_lat < 2 {
            return bad("persiann grid needs at least 2x2 cells".into());
        }
        if !(self.log_sd > 0.0)
            || !(self.min_wavelength > 0.0)
            || self.max_wavelength < self.min_wavelength
        {
            return bad("log_sd and wavelengths must be positive with min <= max".into());
        }
        for p in [&self.persiann, &self.imerg] {
            if !(0.0..1.0).contains(&p.missing_fraction) || p.noise_sd < 0.0 {
                return bad("product missing_fraction must be in [0, 1) and noise_sd >= 0".into());
            }
        }
        Ok(())
    }

    pub fn date(&self, day: usize) -> NaiveDate {
        self.start_date + Days::new(day as u64)
    }
}

#[derive(Debug, Clone, Copy)]
struct Wave {
    kx: f64,
    ky: f64,
    phase: f64,
}

/// Exact conditional quantiles of synthetic gauge precipitation.
#[derive(Debug, Clone)]
pub struct TruthOracle {
    config: SyntheticConfig,
    waves: Vec<Vec<Wave>>,
    normal: Normal,
}

impl TruthOracle {
    fn new(config: &SyntheticConfig) -> Self {
        let waves = (0..config.n_days)
            .map(|d| {
                let mut rng = seed::rng(config.seed, "latent", d as u64);
                (0..config.n_modes)
                    .map(|_| {
                        let theta: f64 = rng.random_range(0.0..2.0 * PI);
                        let wavelength: f64 =
                            rng.random_range(config.min_wavelength..=config.max_wavelength);
                        let k = 2.0 * PI / wavelength;
                        Wave {
                            kx: k * theta.cos(),
                            ky: k * theta.sin(),
                            phase: rng.random_range(0.0..2.0 * PI),
                        }
                    })
                    .collect()
            })
            .collect();
        TruthOracle {
            config: config.clone(),
            waves,
            normal: Normal::standard(),
        }
    }

    pub fn config(&self) -> &SyntheticConfig {
        &self.config
    }

    fn day_index(&self, date: NaiveDate) -> Option<usize> {
        let d = (date - self.config.start_date).num_days();
        (d >= 0 && (d as usize) < self.config.n_days).then_some(d as usize)
    }

    /// Latent field value; unit variance over random phases.
    pub fn latent(&self, day: usize, lon: f64, lat: f64) -> f64 {
        let waves = &self.waves[day];
        let s: f64 = waves
            .iter()
            .map(|w| (w.kx * lon + w.ky * lat + w.phase).cos())
            .sum();
        s * (2.0 / waves.len() as f64).sqrt()
    }

    fn smoothed_latent(&self, day: usize, lon: f64, lat: f64, half: f64) -> f64 {
        let pts = [
            (0.0, 0.0),
            (half, 0.0),
            (-half, 0.0),
            (0.0, half),
            (0.0, -half),
        ];
        pts.iter()
            .map(|(dx, dy)| self.latent(day, lon + dx, lat + dy))
            .sum::<f64>()
            / pts.len() as f64
    }

    fn log_params(&self, day: usize, lon: f64, lat: f64, elevation: f64) -> (f64, f64) {
        let c = &self.config;
        let l = self.latent(day, lon, lat);
        let mu = c.log_mean + c.latent_loading * l + c.elevation_loading * elevation / 1000.0;
        let sd = c.log_sd * (c.sd_loading * l).exp();
        (mu, sd)
    }

    /// Conditional `tau`-quantile of gauge precipitation, or `None` for a
    /// date outside the generated period.
    pub fn quantile(
        &self,
        lon: f64,
        lat: f64,
        elevation: f64,
        date: NaiveDate,
        tau: f64,
    ) -> Option<f64> {
        let day = self.day_index(date)?;
        let p0 = self.config.zero_probability;
        if tau <= p0 {
            return Some(0.0);
        }
        let (mu, sd) = self.log_params(day, lon, lat, elevation);
        let z = self.normal.inverse_cdf((tau - p0) / (1.0 - p0));
        Some((mu + sd * z).exp())
    }

    pub fn quantile_for(&self, record: &StationRecord, tau: f64) -> Option<f64> {
        self.quantile(
            record.longitude,
            record.latitude,
            record.elevation,
            record.date,
            tau,
        )
    }
}

pub struct SyntheticDataset {
    pub stations: Vec<StationRecord>,
    pub persiann: Vec<GridField>,
    pub imerg: Vec<GridField>,
    pub truth: TruthOracle,
}

impl SyntheticDataset {
    pub fn grids(&self) -> impl Iterator<Item = &GridField> {
        self.persiann.iter().chain(self.imerg.iter())
    }
}

fn terrain(lon: f64, lat: f64) -> f64 {
    (1200.0
        + 700.0 * (0.45 * lon).sin() * (0.6 * lat).cos()
        + 300.0 * (0.9 * lat + 0.2 * lon).sin())
    .max(0.0)
}

fn product_fields(
    oracle: &TruthOracle,
    product: &str,
    spec: GridSpec,
    noise: &ProductNoise,
) -> Vec<GridField> {
    let c = &oracle.config;
    (0..c.n_days)
        .map(|d| {
            let mut rng = seed::rng(c.seed, product, d as u64);
            let values = (0..spec.len())
                .map(|k| {
                    let (lon, lat) = spec.center(k);
                    let l = oracle.smoothed_latent(d, lon, lat, spec.cell_size / 2.0);
                    let e: f64 = rng.sample(StandardNormal);
                    let drop: f64 = rng.random();
                    if drop < noise.missing_fraction {
                        GridField::MISSING
                    } else {
                        ((noise.bias + noise.sensitivity * l + noise.noise_sd * e).exp() - 1.0)
                            .max(0.0)
                    }
                })
                .collect();
            GridField {
                product_id: product.to_string(),
                spec,
                date: c.date(d),
                values,
            }
        })
        .collect()
}

/// Generates stations, both product grids and the truth oracle. Fully
/// determined by `config` (including its seed).
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticDataset> {
    config.validate()?;
    let oracle = TruthOracle::new(config);
    let grid = config.persiann_grid;

    let mut placement = seed::rng(config.seed, "stations", 0);
    let lon_lo = grid.lon(0) + grid.cell_size / 2.0;
    let lon_hi = grid.lon(grid.n_lon - 1) - grid.cell_size / 2.0;
    let lat_lo = grid.lat(0) + grid.cell_size / 2.0;
    let lat_hi = grid.lat(grid.n_lat - 1) - grid.cell_size / 2.0;
    let sites: Vec<(String, f64, f64, f64)> = (0..config.n_stations)
        .map(|s| {
            let lon = placement.random_range(lon_lo..=lon_hi);
            let lat = placement.random_range(lat_lo..=lat_hi);
            let jitter: f64 = placement.sample(StandardNormal);
            let elev = (terrain(lon, lat) + 50.0 * jitter).max(0.0).round();
            (format!("SYN{s:05}"), lon, lat, elev)
        })
        .collect();

    let mut stations = Vec::with_capacity(config.n_stations * config.n_days);
    for (s, (id, lon, lat, elev)) in sites.iter().enumerate() {
        let mut rng = seed::rng(config.seed, "precip", s as u64);
        for d in 0..config.n_days {
            let u: f64 = rng.random();
            let z: f64 = rng.sample(StandardNormal);
            let precipitation = if u < config.zero_probability {
                0.0
            } else {
                let (mu, sd) = oracle.log_params(d, *lon, *lat, *elev);
                (mu + sd * z).exp()
            };
            stations.push(StationRecord {
                station_id: id.clone(),
                longitude: *lon,
                latitude: *lat,
                elevation: *elev,
                date: config.date(d),
                precipitation,
            });
        }
    }

    let persiann = product_fields(&oracle, PERSIANN, config.persiann_grid, &config.persiann);
    let imerg = product_fields(&oracle, IMERG, config.imerg_grid, &config.imerg);
    Ok(SyntheticDataset {
        stations,
        persiann,
        imerg,
        truth: oracle,
    })
}

pub fn truth_column(tau: f64) -> String {
    format!("q_{tau}")
}

/// Writes oracle quantiles at `taus` for every station-day.
pub fn write_truth(path: impl AsRef<Path>, data: &SyntheticDataset, taus: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let cols: Vec<String> = taus.iter().map(|&t| truth_column(t)).collect();
    writeln!(w, "station_id,date,{}", cols.join(",")).map_err(io)?;
    for r in &data.stations {
        let qs: Vec<String> = taus
            .iter()
            .map(|&t| {
                data.truth
                    .quantile_for(r, t)
                    .map_or_else(String::new, |q| q.to_string())
            })
            .collect();
        writeln!(
            w,
            "{},{},{}",
            r.station_id,
            r.date.format(DATE_FORMAT),
            qs.join(",")
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
