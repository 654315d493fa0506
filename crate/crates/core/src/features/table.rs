use std::io::Write;
use std::path::Path;

use super::{FeatureVector, FoldAssignment, Sample, FEATURE_NAMES, N_FEATURES};
use crate::data::{parse_date, parse_f64, reader, DATE_FORMAT};
use crate::error::{Error, Result, RowError};

pub const FOLD_COLUMN: &str = "fold_index";

/// Contents of a sample table; `folds` is `None` when the fold column is absent.
#[derive(Debug, Clone)]
pub struct SampleTable {
    pub samples: Vec<Sample>,
    pub folds: Option<Vec<u8>>,
}

impl SampleTable {
    pub fn require_folds(&self, path: &Path, n_folds: usize) -> Result<FoldAssignment> {
        let labels = self.folds.clone().ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: FOLD_COLUMN.into(),
        })?;
        FoldAssignment::from_labels(labels, n_folds, 0)
    }
}

pub fn write_samples(
    path: impl AsRef<Path>,
    samples: &[Sample],
    folds: Option<&FoldAssignment>,
) -> Result<()> {
    let path = path.as_ref();
    if let Some(f) = folds {
        if f.folds.len() != samples.len() {
            return Err(Error::LengthMismatch {
                left: samples.len(),
                right: f.folds.len(),
            });
        }
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "{},target,station_id,date", FEATURE_NAMES.join(",")).map_err(io)?;
    if folds.is_some() {
        write!(w, ",{FOLD_COLUMN}").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for (k, s) in samples.iter().enumerate() {
        for v in s.features.to_array() {
            write!(w, "{v},").map_err(io)?;
        }
        write!(
            w,
            "{},{},{}",
            s.target,
            s.station_id,
            s.date.format(DATE_FORMAT)
        )
        .map_err(io)?;
        if let Some(f) = folds {
            write!(w, ",{}", f.folds[k]).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<SampleTable> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    let mut feat_cols = [0usize; N_FEATURES];
    for (slot, name) in feat_cols.iter_mut().zip(FEATURE_NAMES) {
        *slot = require(name)?;
    }
    let (c_target, c_id, c_date) = (require("target")?, require("station_id")?, require("date")?);
    let c_fold = find(FOLD_COLUMN);

    let mut samples = Vec::new();
    let mut folds = c_fold.map(|_| Vec::new());
    let mut bad = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |c: usize| row.get(c).unwrap_or("");
        let parsed = (|| {
            let mut a = [0.0; N_FEATURES];
            for (v, (&c, name)) in a.iter_mut().zip(feat_cols.iter().zip(FEATURE_NAMES)) {
                *v = parse_f64(field(c), name)?;
                if !v.is_finite() {
                    return Err(format!("non-finite {name}"));
                }
            }
            let target = parse_f64(field(c_target), "target")?;
            if !target.is_finite() || target < 0.0 {
                return Err(format!("target {target} is negative or non-finite"));
            }
            let fold = match c_fold {
                Some(c) => Some(
                    field(c)
                        .parse::<u8>()
                        .map_err(|_| format!("cannot parse {FOLD_COLUMN}"))?,
                ),
                None => None,
            };
            let sample = Sample {
                features: FeatureVector::from_array(&a),
                target,
                station_id: field(c_id).to_string(),
                date: parse_date(field(c_date))?,
            };
            Ok((sample, fold))
        })();
        match parsed {
            Ok((s, fold)) => {
                samples.push(s);
                if let (Some(fs), Some(f)) = (folds.as_mut(), fold) {
                    fs.push(f);
                }
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
    Ok(SampleTable { samples, folds })
}
