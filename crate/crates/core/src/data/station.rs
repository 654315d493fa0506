use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowError};

pub const STATION_COLUMNS: [&str; 6] = [
    "station_id",
    "longitude",
    "latitude",
    "elevation_m",
    "date",
    "precip_mm",
];

pub(crate) const DATE_FORMAT: &str = "%Y-%m-%d";

/// One gauge observation: a station-day of total precipitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub station_id: String,
    pub longitude: f64,
    pub latitude: f64,
    pub elevation: f64,
    pub date: NaiveDate,
    pub precipitation: f64,
}

impl StationRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.station_id.is_empty() {
            return Err("empty station_id".into());
        }
        if !self.longitude.is_finite() || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(format!("longitude {} outside [-180, 180]", self.longitude));
        }
        if !self.latitude.is_finite() || !(-90.0..=90.0).contains(&self.latitude) {
            return Err(format!("latitude {} outside [-90, 90]", self.latitude));
        }
        if !self.elevation.is_finite() {
            return Err("non-finite elevation".into());
        }
        if !self.precipitation.is_finite() || self.precipitation < 0.0 {
            return Err(format!(
                "precipitation {} is negative or non-finite",
                self.precipitation
            ));
        }
        Ok(())
    }
}

pub(crate) fn column_indices<const N: usize>(
    path: &Path,
    headers: &csv::StringRecord,
    wanted: &[&str; N],
) -> Result<[usize; N]> {
    let mut idx = [0usize; N];
    for (slot, name) in idx.iter_mut().zip(wanted) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })?;
    }
    Ok(idx)
}

pub(crate) fn parse_f64(field: &str, what: &str) -> std::result::Result<f64, String> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("cannot parse {what} `{field}`"))
}

pub(crate) fn parse_date(field: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(field.trim(), DATE_FORMAT)
        .map_err(|_| format!("cannot parse date `{field}`"))
}

pub(crate) fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

/// Reads the station table. Every invalid row is collected and reported
/// together with its line number.
pub fn load_stations(path: impl AsRef<Path>) -> Result<Vec<StationRecord>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let [c_id, c_lon, c_lat, c_elev, c_date, c_precip] =
        column_indices(path, &headers, &STATION_COLUMNS)?;

    let mut out = Vec::new();
    let mut bad = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (|| {
            let rec = StationRecord {
                station_id: row.get(c_id).unwrap_or("").to_string(),
                longitude: parse_f64(row.get(c_lon).unwrap_or(""), "longitude")?,
                latitude: parse_f64(row.get(c_lat).unwrap_or(""), "latitude")?,
                elevation: parse_f64(row.get(c_elev).unwrap_or(""), "elevation_m")?,
                date: parse_date(row.get(c_date).unwrap_or(""))?,
                precipitation: parse_f64(row.get(c_precip).unwrap_or(""), "precip_mm")?,
            };
            rec.validate()?;
            Ok::<_, String>(rec)
        })();
        match parsed {
            Ok(rec) => out.push(rec),
            Err(message) => bad.push(RowError { line, message }),
        }
    }
    if !bad.is_empty() {
        return Err(Error::InvalidRows {
            path: path.to_path_buf(),
            rows: bad,
        });
    }
    Ok(out)
}

pub fn write_stations(path: impl AsRef<Path>, records: &[StationRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", STATION_COLUMNS.join(",")).map_err(io)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.station_id,
            r.longitude,
            r.latitude,
            r.elevation,
            r.date.format(DATE_FORMAT),
            r.precipitation
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
