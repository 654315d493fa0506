use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::station::{column_indices, parse_date, parse_f64, reader, DATE_FORMAT};
use crate::error::{Error, Result, RowError};

pub const GRID_COLUMNS: [&str; 5] = ["product_id", "date", "i_lon", "j_lat", "value_mm"];

/// Regular lon/lat grid. Cell `(i, j)` is centred at
/// `(origin_longitude + i * cell_size, origin_latitude + j * cell_size)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_longitude: f64,
    pub origin_latitude: f64,
    pub cell_size: f64,
    pub n_lon: usize,
    pub n_lat: usize,
}

impl GridSpec {
    pub fn new(
        origin_longitude: f64,
        origin_latitude: f64,
        cell_size: f64,
        n_lon: usize,
        n_lat: usize,
    ) -> Result<Self> {
        let spec = GridSpec {
            origin_longitude,
            origin_latitude,
            cell_size,
            n_lon,
            n_lat,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cell_size {} must be positive",
                self.cell_size
            )));
        }
        if self.n_lon == 0 || self.n_lat == 0 {
            return Err(Error::InvalidArgument(
                "grid dimensions must be positive".into(),
            ));
        }
        if !self.origin_longitude.is_finite() || !self.origin_latitude.is_finite() {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_lon * self.n_lat
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i_lon: usize, j_lat: usize) -> usize {
        j_lat * self.n_lon + i_lon
    }

    #[inline]
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index % self.n_lon, index / self.n_lon)
    }

    #[inline]
    pub fn lon(&self, i_lon: usize) -> f64 {
        self.origin_longitude + i_lon as f64 * self.cell_size
    }

    #[inline]
    pub fn lat(&self, j_lat: usize) -> f64 {
        self.origin_latitude + j_lat as f64 * self.cell_size
    }

    pub fn center(&self, index: usize) -> (f64, f64) {
        let (i, j) = self.cell(index);
        (self.lon(i), self.lat(j))
    }
}

/// Per-product grid specs as stored in a TOML file under `[grids.<product>]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSpecFile {
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
}

impl GridSpecFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: GridSpecFile =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (name, spec) in &file.grids {
            spec.validate()
                .map_err(|e| Error::Config(format!("grid `{name}`: {e}")))?;
        }
        Ok(file)
    }

    pub fn get(&self, product: &str) -> Result<&GridSpec> {
        self.grids
            .get(product)
            .ok_or_else(|| Error::Config(format!("no grid spec for product `{product}`")))
    }
}

/// One product on one day. Missing cells hold [`GridField::MISSING`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub product_id: String,
    pub spec: GridSpec,
    pub date: NaiveDate,
    pub values: Vec<f64>,
}

impl GridField {
    pub const MISSING: f64 = f64::NAN;

    pub fn filled(
        product_id: impl Into<String>,
        spec: GridSpec,
        date: NaiveDate,
        value: f64,
    ) -> Self {
        GridField {
            product_id: product_id.into(),
            spec,
            date,
            values: vec![value; spec.len()],
        }
    }

    #[inline]
    pub fn get(&self, index: usize) -> Option<f64> {
        let v = self.values[index];
        (!v.is_nan()).then_some(v)
    }

    #[inline]
    pub fn at(&self, i_lon: usize, j_lat: usize) -> Option<f64> {
        self.get(self.spec.index(i_lon, j_lat))
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }
}

/// Reads a long-format grid table where every product shares `spec`.
pub fn load_grid(path: impl AsRef<Path>, spec: GridSpec) -> Result<Vec<GridField>> {
    spec.validate()?;
    load_with(path.as_ref(), |_| Some(spec))
}

/// Reads a long-format grid table holding several products, each looked up in `specs`.
pub fn load_grid_table(path: impl AsRef<Path>, specs: &GridSpecFile) -> Result<Vec<GridField>> {
    load_with(path.as_ref(), |p| specs.grids.get(p).copied())
}

fn load_with(path: &Path, spec_for: impl Fn(&str) -> Option<GridSpec>) -> Result<Vec<GridField>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let [c_prod, c_date, c_i, c_j, c_val] = column_indices(path, &headers, &GRID_COLUMNS)?;

    let mut fields: BTreeMap<(String, NaiveDate), GridField> = BTreeMap::new();
    let mut seen: HashSet<(String, NaiveDate, usize)> = HashSet::new();
    let mut bad = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (|| {
            let product = row.get(c_prod).unwrap_or("").to_string();
            let spec = spec_for(&product)
                .ok_or_else(|| format!("no grid spec for product `{product}`"))?;
            let date = parse_date(row.get(c_date).unwrap_or(""))?;
            let i: usize = row
                .get(c_i)
                .unwrap_or("")
                .parse()
                .map_err(|_| "cannot parse i_lon".to_string())?;
            let j: usize = row
                .get(c_j)
                .unwrap_or("")
                .parse()
                .map_err(|_| "cannot parse j_lat".to_string())?;
            if i >= spec.n_lon || j >= spec.n_lat {
                return Err(format!(
                    "cell ({i}, {j}) outside {}x{} grid",
                    spec.n_lon, spec.n_lat
                ));
            }
            let value = parse_f64(row.get(c_val).unwrap_or(""), "value_mm")?;
            if !value.is_finite() || value < 0.0 {
                return Err(format!("value {value} is negative or non-finite"));
            }
            Ok((product, spec, date, spec.index(i, j), value))
        })();
        match parsed {
            Ok((product, spec, date, idx, value)) => {
                if !seen.insert((product.clone(), date, idx)) {
                    let (i, j) = spec.cell(idx);
                    bad.push(RowError {
                        line,
                        message: format!("duplicate entry for {product} {date} cell ({i}, {j})"),
                    });
                    continue;
                }
                fields
                    .entry((product.clone(), date))
                    .or_insert_with(|| GridField::filled(product, spec, date, GridField::MISSING))
                    .values[idx] = value;
            }
            Err(message) => bad.push(RowError { line, message }),
        }
    }
    if !bad.is_empty() {
        return Err(Error::InvalidRows {
            path: path.to_path_buf(),
            rows: bad,
        });
    }
    Ok(fields.into_values().collect())
}

/// Writes fields in long format; missing cells are omitted.
pub fn write_grid(path: impl AsRef<Path>, fields: &[GridField]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", GRID_COLUMNS.join(",")).map_err(io)?;
    for f in fields {
        let date = f.date.format(DATE_FORMAT).to_string();
        for (idx, v) in f.values.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            let (i, j) = f.spec.cell(idx);
            writeln!(w, "{},{},{},{},{}", f.product_id, date, i, j, v).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
