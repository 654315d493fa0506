//! Report tables. Floats are written at full round-trip precision; cells
//! with no value are empty and undefined skills read `undefined`.

use std::path::Path;

use serde::Serialize;

use super::evaluate::Skill;
use super::grid::GbdtParams;
use super::run::{CrossingSummary, EvaluationReport, Models, ProtocolAudit, TuningRecord};
use crate::error::{Error, Result};
use crate::features::BuildSummary;

pub const SCORES_FILE: &str = "scores.csv";
pub const STATION_SKILL_FILE: &str = "station_skill.csv";
pub const RUN_SUMMARY_FILE: &str = "run_summary.toml";

fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn skill(v: Option<Skill>) -> String {
    v.map_or_else(String::new, |s| s.to_string())
}

pub fn scores_header(models: Models) -> Vec<&'static str> {
    let mut h = vec!["tau", "stratum", "n"];
    if models.gbdt() {
        h.extend(["gbdt_mean_quantile_score", "gbdt_frequency_score"]);
    }
    if models.qrf() {
        h.extend(["qrf_mean_quantile_score", "qrf_frequency_score"]);
    }
    if models == Models::Both {
        h.extend(["quantile_skill_score", "frequency_skill_score"]);
    }
    h
}

pub fn station_header(models: Models) -> Vec<&'static str> {
    let mut h = vec!["station_id", "tau", "n"];
    if models.gbdt() {
        h.push("gbdt_mean_quantile_score");
    }
    if models.qrf() {
        h.push("qrf_mean_quantile_score");
    }
    if models == Models::Both {
        h.push("quantile_skill_score");
    }
    h
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

pub fn write_scores(path: impl AsRef<Path>, report: &EvaluationReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let models = report.models;
    w.write_record(scores_header(models))
        .map_err(|e| Error::csv(path, e))?;
    for s in &report.strata {
        let mut row = vec![
            s.tau.to_string(),
            s.stratum.as_str().to_string(),
            s.n.to_string(),
        ];
        if models.gbdt() {
            row.push(num(s.candidate.map(|c| c.mean_quantile_score)));
            row.push(num(s.candidate.map(|c| c.frequency_score)));
        }
        if models.qrf() {
            let r = if models.gbdt() {
                s.reference
            } else {
                s.candidate.or(s.reference)
            };
            row.push(num(r.map(|c| c.mean_quantile_score)));
            row.push(num(r.map(|c| c.frequency_score)));
        }
        if models == Models::Both {
            row.push(skill(s.quantile_skill));
            row.push(skill(s.frequency_skill));
        }
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_station_skill(path: impl AsRef<Path>, report: &EvaluationReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let models = report.models;
    w.write_record(station_header(models))
        .map_err(|e| Error::csv(path, e))?;
    for s in &report.stations {
        let mut row = vec![s.station_id.clone(), s.tau.to_string(), s.n.to_string()];
        if models.gbdt() {
            row.push(num(s.candidate));
        }
        if models.qrf() {
            row.push(num(if models.gbdt() {
                s.reference
            } else {
                s.candidate.or(s.reference)
            }));
        }
        if models == Models::Both {
            row.push(skill(s.skill));
        }
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize)]
struct TuningEntry {
    tau: f64,
    best_iteration: usize,
    valid_score: f64,
    grid_index: usize,
    grid_size: usize,
    #[serde(flatten)]
    params: GbdtParams,
}

#[derive(Debug, Serialize)]
struct StratumCount {
    stratum: &'static str,
    n: usize,
}

#[derive(Debug, Serialize)]
struct QrfEntry {
    n_trees: usize,
    mtry: usize,
    min_node_size: usize,
    seed: u64,
    membership: &'static str,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    models: String,
    seed: u64,
    tau_levels: Vec<f64>,
    fold_sizes: &'a [usize],
    test_strata: Vec<StratumCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drops: Option<BuildSummary>,
    audit: &'a ProtocolAudit,
    #[serde(skip_serializing_if = "Option::is_none")]
    gbdt_crossings: Option<CrossingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qrf: Option<QrfEntry>,
    tuning: Vec<TuningEntry>,
}

fn tuning_entry(t: &TuningRecord) -> TuningEntry {
    TuningEntry {
        tau: t.tau,
        best_iteration: t.best_iteration,
        valid_score: t.valid_score,
        grid_index: t.grid_index,
        grid_size: t.grid_size,
        params: t.params,
    }
}

/// Seeds, fold sizes, chosen configurations and audit counters. Contains
/// nothing time-dependent, so identical runs give identical text.
pub fn run_summary(report: &EvaluationReport, drops: Option<BuildSummary>) -> Result<String> {
    let first_tau = report.strata.first().map(|s| s.tau);
    let summary = RunSummary {
        models: report.models.to_string(),
        seed: report.seed,
        tau_levels: report.tau_levels.iter().map(|t| t.value()).collect(),
        fold_sizes: &report.fold_sizes,
        test_strata: report
            .strata
            .iter()
            .filter(|s| Some(s.tau) == first_tau)
            .map(|s| StratumCount {
                stratum: s.stratum.as_str(),
                n: s.n,
            })
            .collect(),
        drops,
        audit: &report.audit,
        gbdt_crossings: report.gbdt_crossings,
        qrf: report.qrf_model.as_ref().map(|m| QrfEntry {
            n_trees: m.config.n_trees,
            mtry: m.config.mtry,
            min_node_size: m.config.min_node_size,
            seed: m.config.seed,
            membership: m.config.membership.as_str(),
        }),
        tuning: report.tuning.iter().map(tuning_entry).collect(),
    };
    toml::to_string(&summary)
        .map_err(|e| Error::Invariant(format!("cannot serialise run summary: {e}")))
}

pub fn write_run_summary(
    path: impl AsRef<Path>,
    report: &EvaluationReport,
    drops: Option<BuildSummary>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, run_summary(report, drops)?).map_err(|e| Error::io(path, e))
}

/// Writes the three report files into `dir`.
pub fn write_reports(
    dir: impl AsRef<Path>,
    report: &EvaluationReport,
    drops: Option<BuildSummary>,
) -> Result<()> {
    let dir = dir.as_ref();
    write_scores(dir.join(SCORES_FILE), report)?;
    write_station_skill(dir.join(STATION_SKILL_FILE), report)?;
    write_run_summary(dir.join(RUN_SUMMARY_FILE), report, drops)
}
