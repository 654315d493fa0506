//! The `quantmerge` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 internal invariant violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{
    generate_synthetic, load_grid_table, load_stations, write_grid, write_stations, write_truth,
    GridSpec, GridSpecFile, SyntheticConfig, IMERG, PERSIANN,
};
use crate::error::{Error, Result};
use crate::experiment::{
    clip_nonnegative, grid_search, refit, report, run_experiment, write_reports, ExperimentConfig,
    GbdtParams, TuningRecord, N_FOLDS, TEST_FOLD, TRAIN_FOLD, VALID_FOLD,
};
use crate::features::{
    load_samples, split_folds, write_samples, BuildSummary, Sample, SampleTable,
};
use crate::gbdt::{gbdt_from_str, save_gbdt, GbdtConfig, GBDT_MAGIC};
use crate::matrix::Dataset;
use crate::pipeline::prepare_samples;
use crate::qrf::{fit_qrf, qrf_from_str, save_qrf, QRF_MAGIC};
use crate::scoring::QuantileLevel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const TUNING_FILE: &str = "tuning.toml";
pub const QRF_MODEL_FILE: &str = "qrf.model";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

pub fn gbdt_model_file(tau: f64) -> String {
    format!("gbdt_tau_{tau}.model")
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => EXIT_USAGE,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "quantmerge",
    version,
    about = "Quantile tree ensembles for satellite-gauge precipitation merging"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration (a previous manifest also works)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true, env = "QUANTMERGE_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_parser = ["gbdt", "qrf", "both"])]
    pub models: Option<String>,
    /// Comma-separated quantile levels
    #[arg(long, global = true, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate synthetic stations, product grids and true quantiles
    Synth,
    /// Build the 19-predictor sample table with fold assignments
    Prepare {
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        grids: PathBuf,
        /// TOML with `[grids.persiann]` and `[grids.imerg]`; defaults to the
        /// manifest next to the grid table
        #[arg(long)]
        grid_spec: Option<PathBuf>,
    },
    /// Grid search per level on the first two folds
    Tune {
        #[arg(long)]
        samples: PathBuf,
    },
    /// Fit one booster per level on the first two folds
    TrainGbdt {
        #[arg(long)]
        samples: PathBuf,
        /// Tuning results; without it the configured fixed parameters are used
        #[arg(long)]
        tuning: Option<PathBuf>,
    },
    /// Fit the forest on the first two folds
    TrainQrf {
        #[arg(long)]
        samples: PathBuf,
    },
    /// Predict with a saved model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        /// Restrict to one fold of the table
        #[arg(long)]
        fold: Option<usize>,
    },
    /// Full protocol: tune, refit, test and write the reports
    Run {
        #[arg(long)]
        samples: PathBuf,
    },
    /// Print the scores table of a finished run
    Report {
        /// Directory holding the run reports
        #[arg(long)]
        run: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Prepare { .. } => "prepare",
            Command::Tune { .. } => "tune",
            Command::TrainGbdt { .. } => "train-gbdt",
            Command::TrainQrf { .. } => "train-qrf",
            Command::Predict { .. } => "predict",
            Command::Run { .. } => "run",
            Command::Report { .. } => "report",
        }
    }
}

/// Everything a command reads from the configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Master seed for both sections when present.
    pub seed: Option<u64>,
    pub synthetic: SyntheticConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let table = match value.get("effective") {
            Some(toml::Value::Table(t)) => t.clone(),
            _ => value,
        };
        table
            .try_into()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn resolve(mut self, common: &Common) -> Result<Self> {
        if let Some(s) = common.seed {
            self.seed = Some(s);
        }
        if let Some(m) = &common.models {
            self.experiment.models = m.parse()?;
        }
        if let Some(t) = &common.tau {
            self.experiment.tau_levels = t
                .iter()
                .map(|&t| QuantileLevel::new(t))
                .collect::<Result<_>>()?;
        }
        self.effective()
    }

    /// Applies the master seed to both sections and validates them.
    pub fn effective(mut self) -> Result<Self> {
        if let Some(s) = self.seed {
            self.synthetic.seed = s;
            self.experiment.seed = s;
        }
        self.synthetic
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.experiment.validate()?;
        Ok(self)
    }
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command: String,
    version: &'static str,
    config_file: Option<String>,
    seed: u64,
    started: String,
    finished: String,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grids: Option<BTreeMap<String, GridSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drops: Option<BuildSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fold_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    tuning: Vec<TuningRecord>,
    effective: RunConfig,
}

struct Ctx {
    config: RunConfig,
    config_file: Option<PathBuf>,
    out: PathBuf,
    started: String,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn input(&mut self, key: &str, path: &Path) {
        self.inputs
            .insert(key.to_string(), path.display().to_string());
    }

    fn output(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config_file: self.config_file.as_ref().map(|p| p.display().to_string()),
            seed: self.config.experiment.seed,
            started: self.started.clone(),
            finished: now(),
            inputs: self.inputs.clone(),
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            grids: None,
            drops: None,
            fold_sizes: None,
            tuning: Vec::new(),
            effective: self.config.clone(),
        }
    }

    fn write_manifest(&mut self, m: RunManifest) -> Result<()> {
        let path = self.out.join(MANIFEST_FILE);
        let text = toml::to_string(&m)
            .map_err(|e| Error::Invariant(format!("cannot serialise manifest: {e}")))?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn cleanup(&self) {
        for p in self
            .outputs
            .iter()
            .chain(std::iter::once(&self.out.join(MANIFEST_FILE)))
        {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            EXIT_INVARIANT
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be positive".into()));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let base = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let config = base.resolve(&cli.common)?;
    let out = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if !matches!(cli.command, Command::Report { .. }) {
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    }
    let mut ctx = Ctx {
        config,
        config_file: cli.common.config.clone(),
        out,
        started: now(),
        inputs: BTreeMap::new(),
        outputs: Vec::new(),
    };
    let result = dispatch(&cli.command, &mut ctx);
    if result.is_err() {
        ctx.cleanup();
    }
    result
}

fn dispatch(command: &Command, ctx: &mut Ctx) -> Result<()> {
    let name = command.name();
    match command {
        Command::Synth => cmd_synth(ctx, name),
        Command::Prepare {
            stations,
            grids,
            grid_spec,
        } => cmd_prepare(ctx, name, stations, grids, grid_spec.as_deref()),
        Command::Tune { samples } => cmd_tune(ctx, name, samples),
        Command::TrainGbdt { samples, tuning } => {
            cmd_train_gbdt(ctx, name, samples, tuning.as_deref())
        }
        Command::TrainQrf { samples } => cmd_train_qrf(ctx, name, samples),
        Command::Predict {
            model,
            samples,
            fold,
        } => cmd_predict(ctx, name, model, samples, *fold),
        Command::Run { samples } => cmd_run(ctx, name, samples),
        Command::Report { run } => cmd_report(run),
    }
}

fn tau_values(config: &ExperimentConfig) -> Vec<f64> {
    config.levels().iter().map(|t| t.value()).collect()
}

fn cmd_synth(ctx: &mut Ctx, name: &str) -> Result<()> {
    let cfg = ctx.config.synthetic.clone();
    let data = generate_synthetic(&cfg)?;
    write_stations(ctx.output("stations.csv"), &data.stations)?;
    let fields: Vec<_> = data.grids().cloned().collect();
    write_grid(ctx.output("grids.csv"), &fields)?;
    write_truth(
        ctx.output("truth.csv"),
        &data,
        &tau_values(&ctx.config.experiment),
    )?;
    let mut m = ctx.manifest(name);
    m.seed = cfg.seed;
    m.grids = Some(BTreeMap::from([
        (PERSIANN.to_string(), cfg.persiann_grid),
        (IMERG.to_string(), cfg.imerg_grid),
    ]));
    ctx.write_manifest(m)
}

fn cmd_prepare(
    ctx: &mut Ctx,
    name: &str,
    stations: &Path,
    grids: &Path,
    grid_spec: Option<&Path>,
) -> Result<()> {
    let spec_path = match grid_spec {
        Some(p) => p.to_path_buf(),
        None => grids.parent().unwrap_or(Path::new(".")).join(MANIFEST_FILE),
    };
    ctx.input("stations", stations);
    ctx.input("grids", grids);
    ctx.input("grid_spec", &spec_path);
    let specs = GridSpecFile::load(&spec_path)?;
    let records = load_stations(stations)?;
    let fields = load_grid_table(grids, &specs)?;
    let (persiann, imerg): (Vec<_>, Vec<_>) =
        fields.into_iter().partition(|f| f.product_id == PERSIANN);
    let imerg: Vec<_> = imerg
        .into_iter()
        .filter(|f| f.product_id == IMERG)
        .collect();
    let set = prepare_samples(&records, &persiann, &imerg)?;
    let s = set.summary;
    eprintln!(
        "station-days {}, retained {}, dropped {} (no field {}, missing cell {})",
        s.station_days,
        s.retained,
        s.dropped(),
        s.dropped_missing_field,
        s.dropped_missing_value
    );
    let folds = split_folds(set.samples.len(), N_FOLDS, ctx.config.experiment.seed)?;
    write_samples(ctx.output(SAMPLES_FILE), &set.samples, Some(&folds))?;
    let mut m = ctx.manifest(name);
    m.drops = Some(s);
    m.fold_sizes = Some(folds.sizes());
    ctx.write_manifest(m)
}

fn load_table(ctx: &mut Ctx, path: &Path) -> Result<SampleTable> {
    ctx.input("samples", path);
    load_samples(path)
}

fn datasets(table: &SampleTable, path: &Path, folds: &[usize]) -> Result<Dataset> {
    let f = table.require_folds(path, N_FOLDS)?;
    let rows: Vec<&Sample> = table
        .samples
        .iter()
        .zip(&f.folds)
        .filter(|(_, k)| folds.contains(&usize::from(**k)))
        .map(|(s, _)| s)
        .collect();
    if rows.is_empty() {
        return Err(Error::Data(format!(
            "{}: folds {folds:?} are empty",
            path.display()
        )));
    }
    Ok(Dataset::from_samples(rows))
}

#[derive(Debug, Serialize, Deserialize)]
struct TuningFile {
    tuning: Vec<TuningEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TuningEntry {
    tau: f64,
    best_iteration: usize,
    valid_score: f64,
    grid_index: usize,
    grid_size: usize,
    params: GbdtParams,
}

fn cmd_tune(ctx: &mut Ctx, name: &str, samples: &Path) -> Result<()> {
    let table = load_table(ctx, samples)?;
    let train = datasets(&table, samples, &[TRAIN_FOLD])?;
    let valid = datasets(&table, samples, &[VALID_FOLD])?;
    let exp = ctx.config.experiment.clone();
    let params = exp.grid_params();
    let mut records = Vec::new();
    for (k, &tau) in exp.levels().iter().enumerate() {
        let base = exp.gbdt_base(tau, k);
        let grid: Vec<GbdtConfig> = params.iter().map(|p| p.apply(&base)).collect();
        let g = grid_search(&train, &valid, &grid)?;
        records.push(TuningRecord {
            tau: tau.value(),
            params: GbdtParams::of(&g.config),
            best_iteration: g.best_iteration,
            valid_score: g.valid_score,
            grid_index: g.best,
            grid_size: grid.len(),
        });
    }
    let file = TuningFile {
        tuning: records
            .iter()
            .map(|r| TuningEntry {
                tau: r.tau,
                best_iteration: r.best_iteration,
                valid_score: r.valid_score,
                grid_index: r.grid_index,
                grid_size: r.grid_size,
                params: r.params,
            })
            .collect(),
    };
    let path = ctx.output(TUNING_FILE);
    let text = toml::to_string(&file).map_err(|e| Error::Invariant(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    let mut m = ctx.manifest(name);
    m.tuning = records;
    ctx.write_manifest(m)
}

fn cmd_train_gbdt(ctx: &mut Ctx, name: &str, samples: &Path, tuning: Option<&Path>) -> Result<()> {
    let table = load_table(ctx, samples)?;
    let train = datasets(&table, samples, &[TRAIN_FOLD, VALID_FOLD])?;
    let tuned: Vec<TuningEntry> = match tuning {
        Some(p) => {
            ctx.input("tuning", p);
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str::<TuningFile>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                .tuning
        }
        None => Vec::new(),
    };
    let exp = ctx.config.experiment.clone();
    for (k, &tau) in exp.levels().iter().enumerate() {
        let base = exp.gbdt_base(tau, k);
        let model = match tuned.iter().find(|t| t.tau == tau.value()) {
            Some(t) => refit(&train, &t.params.apply(&base), t.best_iteration)?,
            None if tuning.is_some() => {
                return Err(Error::Config(format!(
                    "tuning file has no entry for tau = {}",
                    tau.value()
                )));
            }
            None => {
                let params = exp.fixed_gbdt.unwrap_or_else(|| GbdtParams::of(&base));
                let c = params.apply(&base);
                refit(&train, &c, c.num_iterations)?
            }
        };
        save_gbdt(&model, &ctx.output(&gbdt_model_file(tau.value())))?;
    }
    let m = ctx.manifest(name);
    ctx.write_manifest(m)
}

fn cmd_train_qrf(ctx: &mut Ctx, name: &str, samples: &Path) -> Result<()> {
    let table = load_table(ctx, samples)?;
    let train = datasets(&table, samples, &[TRAIN_FOLD, VALID_FOLD])?;
    let model = fit_qrf(&train, &ctx.config.experiment.qrf_config())?;
    save_qrf(&model, &ctx.output(QRF_MODEL_FILE))?;
    let m = ctx.manifest(name);
    ctx.write_manifest(m)
}

fn cmd_predict(
    ctx: &mut Ctx,
    name: &str,
    model: &Path,
    samples: &Path,
    fold: Option<usize>,
) -> Result<()> {
    ctx.input("model", model);
    let table = load_table(ctx, samples)?;
    let rows: Vec<&Sample> = match fold {
        Some(f) => {
            let folds = table.require_folds(samples, N_FOLDS)?;
            table
                .samples
                .iter()
                .zip(&folds.folds)
                .filter(|(_, &k)| usize::from(k) == f)
                .map(|(s, _)| s)
                .collect()
        }
        None => table.samples.iter().collect(),
    };
    let data = Dataset::from_samples(rows.iter().copied());
    let text = std::fs::read_to_string(model).map_err(|e| Error::io(model, e))?;
    let (columns, preds): (Vec<String>, Vec<Vec<f64>>) = match text.lines().next().map(str::trim) {
        Some(GBDT_MAGIC) => {
            let m = gbdt_from_str(&text)?;
            (vec![format!("q_{}", m.tau())], vec![m.predict(&data.x)?])
        }
        Some(QRF_MAGIC) => {
            let m = qrf_from_str(&text)?;
            let taus = tau_values(&ctx.config.experiment);
            let rows = m.predict(&data.x, &taus)?;
            (
                taus.iter().map(|t| format!("q_{t}")).collect(),
                (0..taus.len())
                    .map(|k| rows.iter().map(|r| r[k]).collect())
                    .collect(),
            )
        }
        _ => {
            return Err(Error::ModelFormat {
                line: 1,
                message: "unknown model type".into(),
            })
        }
    };
    let path = ctx.output(PREDICTIONS_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    let mut header = vec![
        "station_id".to_string(),
        "date".to_string(),
        "target".to_string(),
    ];
    header.extend(columns);
    w.write_record(&header).map_err(|e| Error::csv(&path, e))?;
    for (i, s) in rows.iter().enumerate() {
        let mut rec = vec![
            s.station_id.clone(),
            s.date.to_string(),
            s.target.to_string(),
        ];
        rec.extend(preds.iter().map(|p| p[i].to_string()));
        w.write_record(&rec).map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let m = ctx.manifest(name);
    ctx.write_manifest(m)
}

#[derive(Deserialize)]
struct PrepareManifest {
    command: String,
    drops: Option<BuildSummary>,
}

fn prepare_drops(samples: &Path) -> Option<BuildSummary> {
    let path = samples.parent()?.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(path).ok()?;
    let m: PrepareManifest = toml::from_str(&text).ok()?;
    (m.command == "prepare").then_some(m.drops).flatten()
}

fn cmd_run(ctx: &mut Ctx, name: &str, samples: &Path) -> Result<()> {
    let table = load_table(ctx, samples)?;
    let folds = table.require_folds(samples, N_FOLDS)?;
    let drops = prepare_drops(samples);
    for f in [
        report::SCORES_FILE,
        report::STATION_SKILL_FILE,
        report::RUN_SUMMARY_FILE,
    ] {
        ctx.output(f);
    }
    let rep = run_experiment(&table.samples, &folds, &ctx.config.experiment)?;
    debug_assert!(rep
        .predictions
        .gbdt
        .iter()
        .flatten()
        .all(|p| clip_nonnegative(p) == *p));
    write_reports(&ctx.out, &rep, drops)?;
    let mut m = ctx.manifest(name);
    m.fold_sizes = Some(rep.fold_sizes.clone());
    m.drops = drops;
    m.tuning = rep.tuning.clone();
    if rep.audit.test_reads_during_tuning() != 0 {
        return Err(Error::Invariant(format!(
            "fold {TEST_FOLD} was read during tuning"
        )));
    }
    ctx.write_manifest(m)
}

fn cmd_report(run: &Path) -> Result<()> {
    let path = run.join(report::SCORES_FILE);
    let mut rdr = csv::Reader::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::csv(&path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = vec![header];
    for r in rdr.records() {
        rows.push(
            r.map_err(|e| Error::csv(&path, e))?
                .iter()
                .map(String::from)
                .collect(),
        );
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| {
            rows.iter()
                .map(|r| r.get(c).map_or(0, String::len))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in &rows {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(v, &w)| format!("{v:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  "));
    }
    std::io::stdout()
        .write_all(out.as_bytes())
        .map_err(|e| Error::io(&path, e))
}
