//! Quantile loss and verification scores.
//!
//! All scores are negatively oriented except the skill scores, which are
//! bounded above by 1 and positive when the candidate beats the reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nine quantile levels evaluated by default.
pub const DEFAULT_TAU_LEVELS: [f64; 9] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99, 0.999];

/// A probability level strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau < 1.0 {
            Ok(QuantileLevel(tau))
        } else {
            Err(Error::InvalidArgument(format!(
                "quantile level {tau} not in (0, 1)"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn defaults() -> Vec<QuantileLevel> {
        DEFAULT_TAU_LEVELS
            .iter()
            .map(|&t| QuantileLevel(t))
            .collect()
    }
}

impl TryFrom<f64> for QuantileLevel {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        QuantileLevel::new(tau)
    }
}

impl From<QuantileLevel> for f64 {
    fn from(t: QuantileLevel) -> f64 {
        t.0
    }
}

impl std::fmt::Display for QuantileLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Mean quantile score and frequency score of one prediction set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub tau: QuantileLevel,
    pub mean_quantile_score: f64,
    pub frequency_score: f64,
    pub n: usize,
}

/// Pinball loss `u * (I(u >= 0) - tau)`.
pub fn pinball_loss(u: f64, tau: QuantileLevel) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite("residual"));
    }
    Ok(pinball_unchecked(u, tau.0))
}

#[inline]
pub(crate) fn pinball_unchecked(u: f64, tau: f64) -> f64 {
    if u >= 0.0 {
        u * (1.0 - tau)
    } else {
        -u * tau
    }
}

/// Score of predicted quantile `x` against observation `y`.
pub fn quantile_score(x: f64, y: f64, tau: QuantileLevel) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("prediction"));
    }
    if !y.is_finite() {
        return Err(Error::NonFinite("observation"));
    }
    pinball_loss(x - y, tau)
}

fn check_pair(predictions: &[f64], observations: &[f64]) -> Result<()> {
    if predictions.len() != observations.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: observations.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("score sequences"));
    }
    Ok(())
}

pub fn mean_quantile_score(
    predictions: &[f64],
    observations: &[f64],
    tau: QuantileLevel,
) -> Result<f64> {
    check_pair(predictions, observations)?;
    let mut total = 0.0;
    for (&x, &y) in predictions.iter().zip(observations) {
        total += quantile_score(x, y, tau)?;
    }
    Ok(total / predictions.len() as f64)
}

/// `1 - candidate / reference`; zero reference is an error.
pub fn quantile_skill_score(mean_score_candidate: f64, mean_score_reference: f64) -> Result<f64> {
    skill(mean_score_candidate, mean_score_reference)
}

/// Absolute deviation of the empirical coverage `mean(I(y <= x))` from tau.
pub fn frequency_score(
    predictions: &[f64],
    observations: &[f64],
    tau: QuantileLevel,
) -> Result<f64> {
    check_pair(predictions, observations)?;
    let mut covered = 0usize;
    for (&x, &y) in predictions.iter().zip(observations) {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite("score input"));
        }
        if y <= x {
            covered += 1;
        }
    }
    Ok((covered as f64 / predictions.len() as f64 - tau.0).abs())
}

pub fn frequency_skill_score(fr_candidate: f64, fr_reference: f64) -> Result<f64> {
    skill(fr_candidate, fr_reference)
}

fn skill(candidate: f64, reference: f64) -> Result<f64> {
    if !candidate.is_finite() || !reference.is_finite() {
        return Err(Error::NonFinite("skill input"));
    }
    if reference < 0.0 || candidate < 0.0 {
        return Err(Error::InvalidArgument("scores must be nonnegative".into()));
    }
    if reference == 0.0 {
        return Err(Error::UndefinedSkill);
    }
    Ok(1.0 - candidate / reference)
}

pub fn summarize(
    predictions: &[f64],
    observations: &[f64],
    tau: QuantileLevel,
) -> Result<ScoreSummary> {
    Ok(ScoreSummary {
        tau,
        mean_quantile_score: mean_quantile_score(predictions, observations, tau)?,
        frequency_score: frequency_score(predictions, observations, tau)?,
        n: predictions.len(),
    })
}
