use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::data::TruthOracle;
use crate::error::{Error, Result};
use crate::features::Sample;
use crate::scoring::{
    frequency_score, frequency_skill_score, mean_quantile_score, quantile_skill_score,
    QuantileLevel,
};

/// Elementwise `max(0, x)`; also maps `-0.0` to `0.0`.
pub fn clip_nonnegative(predictions: &[f64]) -> Vec<f64> {
    predictions
        .iter()
        .map(|&x| if x <= 0.0 { 0.0 } else { x })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    All,
    Zero,
    Positive,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::All, Stratum::Zero, Stratum::Positive];

    pub fn contains(self, y: f64) -> bool {
        match self {
            Stratum::All => true,
            Stratum::Zero => y == 0.0,
            Stratum::Positive => y > 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::All => "all",
            Stratum::Zero => "zero",
            Stratum::Positive => "positive",
        }
    }
}

/// A skill score, undefined when the reference score is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Skill {
    Defined(f64),
    Undefined,
}

impl Skill {
    fn from_scores(
        candidate: f64,
        reference: f64,
        f: fn(f64, f64) -> Result<f64>,
    ) -> Result<Skill> {
        match f(candidate, reference) {
            Ok(v) => Ok(Skill::Defined(v)),
            Err(Error::UndefinedSkill) => Ok(Skill::Undefined),
            Err(e) => Err(e),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Skill::Defined(v) => Some(v),
            Skill::Undefined => None,
        }
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Skill::Defined(v) => write!(f, "{v}"),
            Skill::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelScores {
    pub mean_quantile_score: f64,
    pub frequency_score: f64,
}

/// Scores of one stratum at one level. Everything is `None` for an empty
/// stratum; skills need both models.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumScores {
    pub tau: f64,
    pub stratum: Stratum,
    pub n: usize,
    pub candidate: Option<ModelScores>,
    pub reference: Option<ModelScores>,
    pub quantile_skill: Option<Skill>,
    pub frequency_skill: Option<Skill>,
}

/// Predictions are indexed `[level][row]`.
pub type LevelPredictions = [Vec<f64>];

fn check_levels(preds: Option<&LevelPredictions>, n: usize, taus: usize) -> Result<()> {
    if let Some(p) = preds {
        if p.len() != taus {
            return Err(Error::LengthMismatch {
                left: taus,
                right: p.len(),
            });
        }
        if let Some(bad) = p.iter().find(|v| v.len() != n) {
            return Err(Error::LengthMismatch {
                left: n,
                right: bad.len(),
            });
        }
    }
    Ok(())
}

fn scores(pred: &[f64], obs: &[f64], tau: QuantileLevel) -> Result<ModelScores> {
    Ok(ModelScores {
        mean_quantile_score: mean_quantile_score(pred, obs, tau)?,
        frequency_score: frequency_score(pred, obs, tau)?,
    })
}

/// Scores on all observations, on zero observations and on positive ones.
pub fn evaluate_strata(
    candidate: Option<&LevelPredictions>,
    reference: Option<&LevelPredictions>,
    observations: &[f64],
    taus: &[QuantileLevel],
) -> Result<Vec<StratumScores>> {
    let n = observations.len();
    check_levels(candidate, n, taus.len())?;
    check_levels(reference, n, taus.len())?;
    if observations.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite("observation"));
    }
    let mut out = Vec::with_capacity(3 * taus.len());
    for (k, &tau) in taus.iter().enumerate() {
        for stratum in Stratum::ALL {
            let rows: Vec<usize> = (0..n)
                .filter(|&i| stratum.contains(observations[i]))
                .collect();
            let obs: Vec<f64> = rows.iter().map(|&i| observations[i]).collect();
            let eval = |p: Option<&LevelPredictions>| -> Result<Option<ModelScores>> {
                match p {
                    Some(p) if !rows.is_empty() => {
                        let pred: Vec<f64> = rows.iter().map(|&i| p[k][i]).collect();
                        scores(&pred, &obs, tau).map(Some)
                    }
                    _ => Ok(None),
                }
            };
            let (c, r) = (eval(candidate)?, eval(reference)?);
            let (quantile_skill, frequency_skill) = match (c, r) {
                (Some(c), Some(r)) => (
                    Some(Skill::from_scores(
                        c.mean_quantile_score,
                        r.mean_quantile_score,
                        quantile_skill_score,
                    )?),
                    Some(Skill::from_scores(
                        c.frequency_score,
                        r.frequency_score,
                        frequency_skill_score,
                    )?),
                ),
                _ => (None, None),
            };
            out.push(StratumScores {
                tau: tau.value(),
                stratum,
                n: rows.len(),
                candidate: c,
                reference: r,
                quantile_skill,
                frequency_skill,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationScores {
    pub station_id: String,
    pub tau: f64,
    pub n: usize,
    pub candidate: Option<f64>,
    pub reference: Option<f64>,
    pub skill: Option<Skill>,
}

/// Mean quantile scores and skill per station (ascending id) and level.
pub fn per_station_scores<S: AsRef<str>>(
    candidate: Option<&LevelPredictions>,
    reference: Option<&LevelPredictions>,
    observations: &[f64],
    station_ids: &[S],
    taus: &[QuantileLevel],
) -> Result<Vec<StationScores>> {
    let n = observations.len();
    if station_ids.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: station_ids.len(),
        });
    }
    check_levels(candidate, n, taus.len())?;
    check_levels(reference, n, taus.len())?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in station_ids.iter().enumerate() {
        groups.entry(s.as_ref()).or_default().push(i);
    }
    let mut out = Vec::with_capacity(groups.len() * taus.len());
    for (id, rows) in &groups {
        let obs: Vec<f64> = rows.iter().map(|&i| observations[i]).collect();
        for (k, &tau) in taus.iter().enumerate() {
            let mean = |p: Option<&LevelPredictions>| -> Result<Option<f64>> {
                p.map(|p| {
                    let pred: Vec<f64> = rows.iter().map(|&i| p[k][i]).collect();
                    mean_quantile_score(&pred, &obs, tau)
                })
                .transpose()
            };
            let (c, r) = (mean(candidate)?, mean(reference)?);
            let skill = match (c, r) {
                (Some(c), Some(r)) => Some(Skill::from_scores(c, r, quantile_skill_score)?),
                _ => None,
            };
            out.push(StationScores {
                station_id: id.to_string(),
                tau: tau.value(),
                n: rows.len(),
                candidate: c,
                reference: r,
                skill,
            });
        }
    }
    Ok(out)
}

/// Test points where some higher level is predicted strictly below a lower
/// one, and the number of such adjacent-level pairs. `taus` must ascend.
pub fn quantile_crossings(preds: &LevelPredictions) -> (usize, usize) {
    let n = preds.first().map_or(0, Vec::len);
    let (mut points, mut pairs) = (0, 0);
    for i in 0..n {
        let c = preds.windows(2).filter(|w| w[1][i] < w[0][i]).count();
        pairs += c;
        points += usize::from(c > 0);
    }
    (points, pairs)
}

/// Exact quantiles of the synthetic generator for each sample.
pub fn oracle_predictions(
    samples: &[&Sample],
    oracle: &TruthOracle,
    taus: &[QuantileLevel],
) -> Result<Vec<Vec<f64>>> {
    taus.iter()
        .map(|tau| {
            samples
                .iter()
                .map(|s| {
                    let f = &s.features;
                    oracle
                        .quantile(f.longitude, f.latitude, f.elevation, s.date, tau.value())
                        .ok_or_else(|| {
                            Error::Data(format!("date {} outside the synthetic period", s.date))
                        })
                })
                .collect()
        })
        .collect()
}
