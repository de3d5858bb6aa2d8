//! The six subcommands. Each one reads its inputs, validates every path and
//! parameter up front, and writes CSV or JSON into the output directory.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use fso_qos::atmosphere::{beta_to_db_per_km, extinction_per_km, particle_size_exponent, path_attenuation_db};
use fso_qos::dataset::{
    aggregate_station_climatology, build_qos_table, parse_visibility_csv, split_dataset, synthesize_dataset,
    write_visibility_csv, StationProfile, VisibilityRecord,
};
use fso_qos::exec::derive_seed;
use fso_qos::link_budget::{
    achievable_data_rate, ber, channel_capacity, db_to_linear, electrical_snr_linear, linear_to_db, power_penalty_db,
    received_power_geometric, snr_budget_db, watts_to_dbm, OokScheme, RfBudgetInputs, TransceiverConfig,
};
use fso_qos::metrics::{compute_metrics, write_metrics_csv, MetricRow};
use fso_qos::{FittedModel, LabeledTable, Learner, LearnerSpec, ModelFile, Parallelism, Regressor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::tables::{
    fmt_f64, parse_feature_row, read_labeled_csv, read_raw_csv, write_json_pretty, write_labeled_csv, CsvOut,
};

/// Names and file stems of the five trained models, in training order.
pub const MODEL_NAMES: [&str; 5] = ["rf", "gbr", "adbr", "sr", "mlnn"];

/// Failures that are reported by the command layer rather than the library.
#[derive(Debug)]
pub enum CommandError {
    Usage(String),
    Validation(String),
    Training(String),
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Validation(m) => write!(f, "validation error: {m}"),
            Self::Training(m) => write!(f, "training failed: {m}"),
        }
    }
}

impl std::error::Error for CommandError {}

/// Shared context for every command.
pub struct RunContext {
    pub cfg: RunConfig,
    pub out_dir: PathBuf,
    pub stations: Vec<String>,
    pub mode: Parallelism,
}

impl RunContext {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn ensure_out_dir(&self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.out_dir).with_context(|| format!("cannot create {}", self.out_dir.display()))
    }
}

fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(CommandError::Validation(format!("{what} {} does not exist", path.display())).into());
    }
    Ok(())
}

/// Overrides a config grid from the command line; an empty list is a usage error.
fn grid_override(flag: &str, text: Option<&str>, fallback: &[f64]) -> anyhow::Result<Vec<f64>> {
    let Some(text) = text else {
        if fallback.is_empty() {
            return Err(CommandError::Usage(format!("{flag} grid is empty")).into());
        }
        return Ok(fallback.to_vec());
    };
    if text.trim().is_empty() {
        return Err(CommandError::Usage(format!("{flag} grid is empty")).into());
    }
    let g = crate::config::parse_grid(text).map_err(|e| CommandError::Usage(format!("{flag}: {e}")))?;
    if g.iter().any(|v| !(*v > 0.0)) {
        return Err(CommandError::Usage(format!("{flag} values must be positive")).into());
    }
    Ok(g)
}

pub fn attenuation_sweep(ctx: &RunContext, visibility: Option<&str>, wavelengths: Option<&str>) -> anyhow::Result<()> {
    let vis = grid_override("--visibility", visibility, &ctx.cfg.visibility_grid_km)?;
    let lam = grid_override("--wavelengths", wavelengths, &ctx.cfg.wavelengths_nm)?;
    ctx.ensure_out_dir()?;
    let model = ctx.cfg.model;
    let mut out = CsvOut::create(
        &ctx.out("attenuation_sweep.csv"),
        &["visibility_km", "wavelength_nm", "q", "beta_per_km", "atten_db_per_km"],
    )?;
    for &v in &vis {
        let q = particle_size_exponent(v, model)?;
        for &l in &lam {
            let beta = extinction_per_km(v, l, model)?;
            out.nums(&[v, l, q, beta, beta_to_db_per_km(beta)])?;
        }
    }
    out.finish()
}

pub fn link_sweep(ctx: &RunContext) -> anyhow::Result<()> {
    let c = &ctx.cfg;
    for (name, g) in [
        ("wavelengths_nm", &c.wavelengths_nm),
        ("range_grid_km", &c.range_grid_km),
        ("attenuation_grid_db_per_km", &c.attenuation_grid_db_per_km),
        ("tx_powers_w", &c.tx_powers_w),
        ("snr_grid_linear", &c.snr_grid_linear),
    ] {
        if g.is_empty() {
            return Err(CommandError::Usage(format!("{name} is empty")).into());
        }
    }
    if c.fog_classes.is_empty() {
        return Err(CommandError::Usage("fog_classes is empty".into()).into());
    }
    ctx.ensure_out_dir()?;
    let t = c.transceiver;
    let noise = &c.noise;

    let mut out = CsvOut::create(
        &ctx.out("data_rate_vs_attenuation.csv"),
        &["wavelength_nm", "attenuation_db_per_km", "received_power_w", "data_rate_bps"],
    )?;
    for &l in &c.wavelengths_nm {
        let cfg = TransceiverConfig { wavelength_nm: l, ..t };
        for &a in &c.attenuation_grid_db_per_km {
            let p = received_power_geometric(&cfg, a, c.range_km)?;
            out.nums(&[l, a, p, achievable_data_rate(p, l, cfg.photons_per_bit, noise)?])?;
        }
    }
    out.finish()?;

    let mut out = CsvOut::create(
        &ctx.out("received_power_vs_range.csv"),
        &["fog_class", "visibility_km", "range_km", "attenuation_db_per_km", "received_power_w", "received_power_dbm"],
    )?;
    for fog in &c.fog_classes {
        let a = beta_to_db_per_km(extinction_per_km(fog.visibility_km, t.wavelength_nm, c.model)?);
        for &r in &c.range_grid_km {
            let p = received_power_geometric(&t, a, r)?;
            let mut row = vec![fog.name.clone()];
            row.extend([fog.visibility_km, r, a, p, watts_to_dbm(p)].map(fmt_f64));
            out.row(&row)?;
        }
    }
    out.finish()?;

    let mut out = CsvOut::create(
        &ctx.out("ber_vs_attenuation.csv"),
        &["tx_power_w", "attenuation_db_per_km", "received_power_w", "snr_linear", "ber_nrz", "ber_rz"],
    )?;
    for &pw in &c.tx_powers_w {
        let cfg = TransceiverConfig { tx_power_w: pw, ..t };
        for &a in &c.attenuation_grid_db_per_km {
            let p = received_power_geometric(&cfg, a, c.range_km)?;
            let s = electrical_snr_linear(p, noise)?;
            out.nums(&[pw, a, p, s, ber(OokScheme::NrzOok, s)?, ber(OokScheme::RzOok, s)?])?;
        }
    }
    out.finish()?;

    let mut out = CsvOut::create(
        &ctx.out("capacity_vs_range.csv"),
        &["wavelength_nm", "visibility_km", "range_km", "attenuation_db", "snr_db", "capacity_bps"],
    )?;
    for &l in &c.wavelengths_nm {
        let beta = extinction_per_km(c.link_visibility_km, l, c.model)?;
        for &r in &c.range_grid_km {
            let tau = path_attenuation_db(beta, r)?;
            let inputs = RfBudgetInputs {
                tx_power_dbm: watts_to_dbm(t.tx_power_w),
                wavelength_m: l * 1e-9,
                total_attenuation_db: tau,
                ..c.budget
            };
            let snr_db = snr_budget_db(&inputs)?;
            let cap = channel_capacity(c.capacity_bandwidth_hz, db_to_linear(snr_db))?;
            out.nums(&[l, c.link_visibility_km, r, tau, snr_db, cap])?;
        }
    }
    out.finish()?;

    let mut out = CsvOut::create(&ctx.out("capacity_vs_snr.csv"), &["bandwidth_hz", "snr_linear", "snr_db", "capacity_bps"])?;
    for &s in &c.snr_grid_linear {
        out.nums(&[c.capacity_bandwidth_hz, s, linear_to_db(s), channel_capacity(c.capacity_bandwidth_hz, s)?])?;
    }
    out.finish()?;

    let mut out = CsvOut::create(
        &ctx.out("power_penalty_vs_range.csv"),
        &["fog_class", "visibility_km", "range_km", "power_penalty_db"],
    )?;
    let clear = extinction_per_km(c.clear_visibility_km, t.wavelength_nm, c.model)?;
    for fog in &c.fog_classes {
        let beta = extinction_per_km(fog.visibility_km, t.wavelength_nm, c.model)?;
        for &r in &c.range_grid_km {
            let pp = power_penalty_db(&t, noise, OokScheme::NrzOok, clear, beta, r, c.target_ber)?;
            let mut row = vec![fog.name.clone()];
            row.extend([fog.visibility_km, r, pp].map(fmt_f64));
            out.row(&row)?;
        }
    }
    out.finish()
}

fn selected_profiles(stations: &[String]) -> anyhow::Result<Vec<StationProfile>> {
    if stations.is_empty() {
        return Ok(StationProfile::presets());
    }
    Ok(stations.iter().map(|s| StationProfile::preset(s)).collect::<fso_qos::Result<_>>()?)
}

pub fn synth_data(ctx: &RunContext) -> anyhow::Result<()> {
    let profiles = selected_profiles(&ctx.stations)?;
    let records = synthesize_dataset(&profiles, ctx.cfg.days, ctx.cfg.seed)?;
    ctx.ensure_out_dir()?;
    let path = ctx.out("visibility.csv");
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    write_visibility_csv(std::io::BufWriter::new(file), &records)?;
    write_climatology(ctx, &records)
}

fn write_climatology(ctx: &RunContext, records: &[VisibilityRecord]) -> anyhow::Result<()> {
    let clim = aggregate_station_climatology(records, &ctx.stations, &ctx.cfg.wavelengths_nm, ctx.cfg.model)?;
    let mut out = CsvOut::create(
        &ctx.out("climatology.csv"),
        &["station", "n_records", "mean_visibility_km", "wavelength_nm", "mean_beta_per_km"],
    )?;
    for c in &clim {
        for &(l, b) in &c.mean_extinction {
            out.row([c.station.clone(), c.n_records.to_string(), fmt_f64(c.mean_visibility_km), fmt_f64(l), fmt_f64(b)])?;
        }
    }
    out.finish()
}

/// Visibility records either read from `data` or synthesised from the
/// station presets, restricted to the selected stations.
fn load_records(ctx: &RunContext, data: Option<&Path>) -> anyhow::Result<(Vec<VisibilityRecord>, String)> {
    let Some(path) = data else {
        let profiles = selected_profiles(&ctx.stations)?;
        return Ok((synthesize_dataset(&profiles, ctx.cfg.days, ctx.cfg.seed)?, "synthetic".into()));
    };
    require_file(path, "data file")?;
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let parsed = parse_visibility_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    for r in &parsed.rejected {
        eprintln!("warning: {}: line {} skipped ({})", path.display(), r.line, r.reason);
    }
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    let mut records = parsed.records;
    if !ctx.stations.is_empty() {
        for s in &ctx.stations {
            if !records.iter().any(|r| &r.station == s) {
                return Err(fso_qos::Error::MissingStation(s.clone()).into());
            }
        }
        records.retain(|r| ctx.stations.contains(&r.station));
    }
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok((records, name))
}

/// QoS table over the records, uniformly subsampled to at most `max_rows`
/// rows while keeping row order. Only records that contribute a sampled row
/// are expanded.
fn sampled_qos_table(ctx: &RunContext, records: &[VisibilityRecord]) -> anyhow::Result<LabeledTable> {
    let sweep = ctx.cfg.qos_sweep();
    let per = sweep.wavelengths_nm.len() * sweep.tx_powers_w.len() * 2;
    let total = records.len() * per;
    if total <= ctx.cfg.max_rows {
        return Ok(build_qos_table(records, &sweep, ctx.mode)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.cfg.seed, 1));
    let mut picked = rand::seq::index::sample(&mut rng, total, ctx.cfg.max_rows).into_vec();
    picked.sort_unstable();
    let used: Vec<usize> = picked.iter().map(|i| i / per).collect::<BTreeSet<_>>().into_iter().collect();
    let subset: Vec<VisibilityRecord> = used.iter().map(|&r| records[r].clone()).collect();
    let table = build_qos_table(&subset, &sweep, ctx.mode)?;
    let rows: Vec<usize> = picked
        .iter()
        .map(|&i| used.binary_search(&(i / per)).expect("sampled record present") * per + i % per)
        .collect();
    Ok(table.subset(&rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub total: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestModel {
    pub name: String,
    pub file: String,
    pub kind: String,
    pub status: String,
    pub spec: LearnerSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub source: String,
    pub attenuation_model: String,
    pub range_km: f64,
    pub feature_names: Vec<String>,
    pub target: String,
    pub rows: SplitSizes,
    pub models: Vec<ManifestModel>,
}

fn mse(model: &FittedModel, data: &LabeledTable) -> Option<f64> {
    if data.is_empty() {
        return None;
    }
    let p = model.predict_table(data).ok()?;
    Some(compute_metrics(data.targets(), &p).ok()?.mse)
}

pub fn train(ctx: &RunContext, data: Option<&Path>) -> anyhow::Result<()> {
    let (records, source) = load_records(ctx, data)?;
    let table = sampled_qos_table(ctx, &records)?;
    let (train, val, test) = split_dataset(&table, ctx.cfg.split, derive_seed(ctx.cfg.seed, 2))?;
    if train.n_rows() < ctx.cfg.stack_folds {
        return Err(CommandError::Validation(format!(
            "{} training rows cannot be split into {} folds",
            train.n_rows(),
            ctx.cfg.stack_folds
        ))
        .into());
    }
    ctx.ensure_out_dir()?;
    let models_dir = ctx.out("models");
    fs::create_dir_all(&models_dir).with_context(|| format!("cannot create {}", models_dir.display()))?;
    write_labeled_csv(&ctx.out("train_table.csv"), &train)?;
    write_labeled_csv(&ctx.out("validation_table.csv"), &val)?;
    write_labeled_csv(&ctx.out("test_table.csv"), &test)?;

    let specs = [
        ctx.cfg.forest_spec(),
        ctx.cfg.gbr_spec(),
        ctx.cfg.adbr_spec(),
        ctx.cfg.stack_spec(),
        ctx.cfg.mlp_spec(),
    ];
    let mut log = CsvOut::create(&ctx.out("training_log.csv"), &["model", "stage", "train_loss", "validation_loss"])?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (name, spec) in MODEL_NAMES.iter().zip(specs) {
        let mut history = Vec::new();
        let fitted = match &spec {
            LearnerSpec::Mlp(m) => m.fit(&train).map(|report| {
                history = report.history;
                FittedModel::Mlp(report.model)
            }),
            other => other.fit(&train, ctx.mode),
        };
        for e in &history {
            log.row([name.to_string(), format!("epoch {}", e.epoch), fmt_f64(e.train), opt(e.validation)])?;
        }
        let file = format!("models/{name}.json");
        let status = match fitted {
            Ok(model) => {
                if let FittedModel::Gbr(g) = &model {
                    log_gbr_stages(&mut log, name, g, &train, &val)?;
                }
                log.row([name.to_string(), "final".into(), opt(mse(&model, &train)), opt(mse(&model, &val))])?;
                let mf = ModelFile::new(*name, train.feature_names().to_vec(), ctx.cfg.seed, spec.clone(), model);
                let path = ctx.out(&file);
                let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                mf.write_json(std::io::BufWriter::new(f))?;
                "ok".to_string()
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                failures.push(format!("{name}: {e}"));
                format!("failed: {e}")
            }
        };
        entries.push(ManifestModel { name: name.to_string(), file, kind: spec.kind().into(), status, spec });
    }
    log.finish()?;

    let manifest = Manifest {
        seed: ctx.cfg.seed,
        source,
        attenuation_model: ctx.cfg.model.to_string(),
        range_km: ctx.cfg.range_km,
        feature_names: table.feature_names().to_vec(),
        target: crate::tables::TARGET_COLUMN.into(),
        rows: SplitSizes { total: table.n_rows(), train: train.n_rows(), validation: val.n_rows(), test: test.n_rows() },
        models: entries,
    };
    write_json_pretty(&ctx.out("manifest.json"), &manifest)?;
    if !failures.is_empty() {
        return Err(CommandError::Training(failures.join("; ")).into());
    }
    Ok(())
}

fn log_gbr_stages(
    log: &mut CsvOut,
    name: &str,
    g: &fso_qos::learners::GradientBoostModel,
    train: &LabeledTable,
    val: &LabeledTable,
) -> anyhow::Result<()> {
    let staged_mse = |d: &LabeledTable| -> anyhow::Result<Vec<f64>> {
        let mut sse = vec![0.0; g.trees().len() + 1];
        for (x, y) in d.rows().iter().zip(d.targets()) {
            for (s, p) in sse.iter_mut().zip(g.staged_predict(x)?) {
                *s += (y - p).powi(2);
            }
        }
        Ok(sse.into_iter().map(|s| s / d.n_rows().max(1) as f64).collect())
    };
    let tr = staged_mse(train)?;
    let va = if val.is_empty() { None } else { Some(staged_mse(val)?) };
    for (i, t) in tr.iter().enumerate().skip(1) {
        let v = va.as_ref().map(|v| fmt_f64(v[i])).unwrap_or_default();
        log.row([name.to_string(), format!("tree {i}"), fmt_f64(*t), v])?;
    }
    Ok(())
}

fn read_model(path: &Path) -> anyhow::Result<ModelFile> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    ModelFile::read_json(BufReader::new(f)).with_context(|| format!("reading model {}", path.display()))
}

pub fn evaluate(ctx: &RunContext, models_dir: Option<&Path>, test: Option<&Path>) -> anyhow::Result<()> {
    let models_dir = models_dir.map_or_else(|| ctx.out("models"), Path::to_path_buf);
    let test_path = test.map_or_else(|| ctx.out("test_table.csv"), Path::to_path_buf);
    let paths: Vec<PathBuf> = MODEL_NAMES.iter().map(|n| models_dir.join(format!("{n}.json"))).collect();
    let mut missing: Vec<String> = paths.iter().filter(|p| !p.is_file()).map(|p| p.display().to_string()).collect();
    if !test_path.is_file() {
        missing.push(test_path.display().to_string());
    }
    if !missing.is_empty() {
        return Err(CommandError::Validation(format!("missing input files: {}", missing.join(", "))).into());
    }
    let table = read_labeled_csv(&test_path)?;
    if table.is_empty() {
        return Err(CommandError::Validation(format!("{} has no rows", test_path.display())).into());
    }
    let stations = station_order(ctx, &table)?;

    let mut rows = Vec::new();
    ctx.ensure_out_dir()?;
    let mut pred_out = CsvOut::create(&ctx.out("predictions.csv"), &["model", "station", "row", "actual", "predicted"])?;
    for (name, path) in MODEL_NAMES.iter().zip(&paths) {
        let mf = read_model(path)?;
        mf.check_header(table.feature_names()).with_context(|| format!("model {}", path.display()))?;
        let pred = mf.model.predict_table(&table)?;
        let station_of = |i: usize| table.groups().get(i).map_or("all", String::as_str);
        for (i, (a, p)) in table.targets().iter().zip(&pred).enumerate() {
            pred_out.row([name.to_string(), station_of(i).to_string(), i.to_string(), fmt_f64(*a), fmt_f64(*p)])?;
        }
        for s in &stations {
            let idx: Vec<usize> = (0..table.n_rows()).filter(|&i| station_of(i) == s).collect();
            if idx.is_empty() {
                continue;
            }
            let a: Vec<f64> = idx.iter().map(|&i| table.targets()[i]).collect();
            let p: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
            rows.push(MetricRow::new(*name, s.as_str(), &compute_metrics(&a, &p)?));
        }
        let all = if ctx.stations.is_empty() {
            compute_metrics(table.targets(), &pred)?
        } else {
            let idx: Vec<usize> = (0..table.n_rows()).filter(|&i| stations.iter().any(|s| s == station_of(i))).collect();
            let a: Vec<f64> = idx.iter().map(|&i| table.targets()[i]).collect();
            let p: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
            compute_metrics(&a, &p)?
        };
        rows.push(MetricRow::new(*name, "all", &all));
    }
    pred_out.finish()?;
    let path = ctx.out("metrics.csv");
    let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    write_metrics_csv(std::io::BufWriter::new(f), &rows)?;
    Ok(())
}

/// Stations to report on: the selection, or every label in the table in
/// order of first appearance.
fn station_order(ctx: &RunContext, table: &LabeledTable) -> anyhow::Result<Vec<String>> {
    let mut present: Vec<String> = Vec::new();
    for g in table.groups() {
        if !present.contains(g) {
            present.push(g.clone());
        }
    }
    if ctx.stations.is_empty() {
        return Ok(present);
    }
    for s in &ctx.stations {
        if !present.contains(s) {
            return Err(fso_qos::Error::MissingStation(s.clone()).into());
        }
    }
    Ok(ctx.stations.clone())
}

pub fn predict(ctx: &RunContext, model: &Path, input: &Path, output: Option<&Path>) -> anyhow::Result<()> {
    require_file(model, "model file")?;
    require_file(input, "feature file")?;
    let mf = read_model(model)?;
    let k = mf.feature_names.len();
    let f = File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let raw = read_raw_csv(BufReader::new(f)).with_context(|| format!("reading {}", input.display()))?;
    let out_path = output.map_or_else(|| ctx.out("predict.csv"), Path::to_path_buf);
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let Some((header, records)) = raw else {
        let mut header: Vec<&str> = mf.feature_names.iter().map(String::as_str).collect();
        header.push("prediction");
        return CsvOut::create(&out_path, &header)?.finish();
    };
    if header.len() < k || header[..k] != mf.feature_names[..] {
        mf.check_header(&header[..k.min(header.len())])
            .with_context(|| format!("{} against model {}", input.display(), model.display()))?;
    }
    let mut out_header: Vec<&str> = header.iter().map(String::as_str).collect();
    out_header.push("prediction");
    let mut out = CsvOut::create(&out_path, &out_header)?;
    for (i, rec) in records.iter().enumerate() {
        let line = i as u64 + 2;
        let x = parse_feature_row(rec, &mf.feature_names, header.len(), line)
            .with_context(|| format!("reading {}", input.display()))?;
        let y = mf.model.predict(&x)?;
        let mut fields: Vec<String> = rec.iter().map(str::to_string).collect();
        fields.push(fmt_f64(y));
        out.row(&fields)?;
    }
    out.finish()
}
