//! Config-driven end-to-end run: raw CSVs to Table 1, Table 2, correlation
//! paths and a manifest of every decision taken on the way.

mod config;
mod tables;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::info;
use serde::{Deserialize, Serialize};

pub use config::{ArchLm, ArmaGrid, Cache, PipelineConfig, Rolling, SeriesSource, Window};
pub use tables::{
    dgp_label, emit_table1, emit_table2, fmt3, fmt_se, recovery_table, series_label, Table, Table1Row, Table2Tests,
};

use crate::correlation::{
    ccc_estimate, fit_corr_with, fit_nlarc_from_dcc, CorrFit, CorrelationPath, EstimationOptions, ModelKind,
    BOUNDARY_TOL,
};
use crate::data::{
    align_panel, apply_transform, fetch_remote_series, load_series_csv, write_panel_csv, AlignedPanel, RawSeries,
    TransformSpec, MIN_ESTIMATION_LENGTH,
};
use crate::diagnostics::{
    adf_test, arch_lm_test, default_max_lag, select_arma, AdfResult, ArchLmResult, ArmaSpec,
};
use crate::error::{Error, Result};
use crate::inference::{lr_test, pair_label, rolling_correlation, RollingPath, DERIVATIVE_STEP};
use crate::volatility::{first_step, DegarchPanel, GarchParams, ScaleSource, GARCH_STARTS, MIN_GARCH_LENGTH};

/// Name of the staging directory inside the output directory.
pub const STAGING_DIR: &str = ".partial";
/// Where the staging directory is moved when a run fails.
pub const FAILED_DIR: &str = "failed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchRecord {
    pub params: GarchParams,
    pub std_errors: [Option<f64>; 3],
    pub loglik: f64,
    pub converged: bool,
}

/// Every decision taken for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub name: String,
    pub source: String,
    pub raw_obs: usize,
    pub dropped_rows: usize,
    pub window_obs: usize,
    pub use_log: bool,
    pub log_forced: bool,
    pub adf: AdfResult,
    pub differenced: bool,
    pub difference_forced: bool,
    pub arma: ArmaSpec,
    pub arma_aic: f64,
    pub arma_candidates: Vec<(ArmaSpec, Option<f64>)>,
    pub arch_lm: ArchLmResult,
    pub heteroskedastic: bool,
    pub scale: ScaleSource,
    pub garch: Option<GarchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub aligned_obs: usize,
    pub estimation_obs: usize,
}

/// Fixed numerical settings, recorded so a run can be audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub adf_level: f64,
    pub arch_lm_level: f64,
    pub min_garch_length: usize,
    pub garch_starts: Vec<(f64, f64)>,
    pub estimation: EstimationOptions,
    pub boundary_tol: f64,
    pub derivative_step: f64,
}

impl Settings {
    fn current(estimation: &EstimationOptions) -> Self {
        Self {
            adf_level: 0.05,
            arch_lm_level: 0.05,
            min_garch_length: MIN_GARCH_LENGTH,
            garch_starts: GARCH_STARTS.to_vec(),
            estimation: estimation.clone(),
            boundary_tol: BOUNDARY_TOL,
            derivative_step: DERIVATIVE_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: PipelineConfig,
    pub sample: Sample,
    pub series: Vec<SeriesRecord>,
    pub settings: Settings,
    /// Requested fits, in CCC, DCC, NLARC order.
    pub fits: Vec<CorrFit>,
    pub tests: Table2Tests,
    pub artifacts: Vec<String>,
}

fn table1_rows(series: &[SeriesRecord]) -> Vec<Table1Row> {
    series
        .iter()
        .map(|s| Table1Row {
            name: s.name.clone(),
            differenced: s.differenced,
            spec: s.arma,
            arch_lm_p: s.arch_lm.p_value,
            garch: s.scale == ScaleSource::Garch,
        })
        .collect()
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn table1(&self) -> Table {
        emit_table1(&table1_rows(&self.series))
    }

    pub fn table2(&self) -> Result<Table> {
        emit_table2(&self.fits, &self.tests)
    }
}

/// Result of a successful run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub degarch: DegarchPanel,
    pub paths: Vec<(ModelKind, CorrelationPath)>,
    pub rolling: RollingPath,
    pub files: Vec<PathBuf>,
}

fn load_source(src: &SeriesSource, cfg: &PipelineConfig) -> Result<RawSeries> {
    let mut s = match (&src.path, &src.url) {
        (Some(p), _) => load_series_csv(p, &src.date_column, &src.value_column)?,
        (None, Some(url)) => {
            let dir = &cfg.cache.as_ref().expect("validated").dir;
            fetch_remote_series(url, &src.date_column, &src.value_column, dir)?
        }
        (None, None) => unreachable!("validated"),
    };
    s.name = src.display_name().to_string();
    Ok(s)
}

/// Writes `date,pair,rho` rows: one per date and pair `i < j`.
pub fn write_path_csv(path: &Path, dates: &[NaiveDate], names: &[String], p: &CorrelationPath) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["date", "pair", "rho"])?;
    let n = p.n;
    for (t, d) in dates.iter().enumerate() {
        let r = p.r(t);
        for i in 0..n {
            for j in i + 1..n {
                w.write_record([d.to_string(), pair_label(names, i, j), r[i * n + j].to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Same layout as [`write_path_csv`]; undefined windows are left blank.
pub fn write_rolling_csv(path: &Path, r: &RollingPath) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["date", "pair", "rho"])?;
    for (t, d) in r.dates.iter().enumerate() {
        for (k, label) in r.labels.iter().enumerate() {
            let v = r.values[k][t].map(|x| x.to_string()).unwrap_or_default();
            w.write_record([d.to_string(), label.clone(), v])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_table(dir: &Path, stem: &str, table: &Table, files: &mut Vec<String>) -> Result<()> {
    let csv_name = format!("{stem}.csv");
    let txt_name = format!("{stem}.txt");
    write_text(&dir.join(&csv_name), &table.to_csv_string()?)?;
    write_text(&dir.join(&txt_name), &table.to_text())?;
    files.push(csv_name);
    files.push(txt_name);
    Ok(())
}

/// Output of the diagnostic stages.
#[derive(Debug, Clone)]
pub struct Diagnosis {
    /// Panel after the chosen log and difference transforms.
    pub transformed: AlignedPanel,
    pub records: Vec<SeriesRecord>,
    pub sample: Sample,
}

impl Diagnosis {
    pub fn arma_specs(&self) -> Vec<ArmaSpec> {
        self.records.iter().map(|r| r.arma).collect()
    }

    /// Table 1 before the variance step; GARCH is marked where ARCH-LM rejects.
    pub fn table1(&self) -> Table {
        let mut rows = table1_rows(&self.records);
        for (row, rec) in rows.iter_mut().zip(&self.records) {
            row.garch = rec.heteroskedastic;
        }
        emit_table1(&rows)
    }
}

/// Ingested series, windowed, with their pre-window observation counts.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub series: Vec<RawSeries>,
    pub raw_obs: Vec<usize>,
    /// Inner join of `series` on dates, untransformed.
    pub aligned: AlignedPanel,
}

/// load → window → align.
pub fn ingest(cfg: &PipelineConfig) -> Result<Ingested> {
    cfg.validate()?;
    let mut raw = Vec::with_capacity(cfg.series.len());
    let mut counts = Vec::with_capacity(cfg.series.len());
    for src in &cfg.series {
        let name = src.display_name();
        let s = load_source(src, cfg).map_err(|e| Error::stage("load", Some(name), e))?;
        let raw_obs = s.len();
        let s = match cfg.window {
            Some(w) => s.window(w.start, w.end),
            None => s,
        };
        if s.is_empty() {
            return Err(Error::stage("window", Some(name), Error::NoRows(s.source.clone())));
        }
        counts.push(raw_obs);
        raw.push(s);
    }
    let aligned = align_panel(&raw).map_err(|e| Error::stage("align", None, e))?;
    info!("aligned panel: {} dates, {} series", aligned.len(), aligned.n_series());
    Ok(Ingested {
        series: raw,
        raw_obs: counts,
        aligned,
    })
}

/// ingest → ADF → transform → ARMA selection → ARCH-LM.
pub fn diagnose(cfg: &PipelineConfig) -> Result<Diagnosis> {
    let Ingested {
        series: raw,
        raw_obs,
        aligned,
    } = ingest(cfg)?;

    let n = aligned.n_series();
    let mut specs = Vec::with_capacity(n);
    let mut adfs = Vec::with_capacity(n);
    for (i, src) in cfg.series.iter().enumerate() {
        let name = src.display_name();
        let wrap = |stage: &str, e| Error::stage(stage, Some(name), e);
        let x = aligned.column(i);
        let positive = x.iter().all(|v| *v > 0.0);
        let use_log = src.log.unwrap_or(positive);
        if use_log && !positive {
            return Err(wrap("transform", Error::NonPositiveLog(name.to_string())));
        }
        let level: Vec<f64> = if use_log { x.iter().map(|v| v.ln()).collect() } else { x };
        let adf = adf_test(&level, default_max_lag(level.len())).map_err(|e| wrap("adf", e))?;
        let differenced = src.difference.unwrap_or(!adf.reject_unit_root_at_5pct);
        specs.push(TransformSpec::new(use_log, differenced as u8).map_err(|e| wrap("transform", e))?);
        adfs.push(adf);
    }
    let transformed = apply_transform(&aligned, &specs).map_err(|e| Error::stage("transform", None, e))?;
    if transformed.len() < MIN_ESTIMATION_LENGTH {
        return Err(Error::stage(
            "transform",
            None,
            Error::TooShort {
                needed: MIN_ESTIMATION_LENGTH,
                got: transformed.len(),
            },
        ));
    }

    let mut records = Vec::with_capacity(n);
    for (i, (src, adf)) in cfg.series.iter().zip(adfs).enumerate() {
        let name = src.display_name();
        let y = transformed.column(i);
        let sel = select_arma(&y, cfg.arma.p_max, cfg.arma.q_max).map_err(|e| Error::stage("arma", Some(name), e))?;
        let lm = arch_lm_test(&sel.fit.residuals, cfg.arch_lm.lags).map_err(|e| Error::stage("arch-lm", Some(name), e))?;
        info!("{name}: {} (AIC {:.4}), ARCH-LM p = {:.4}", sel.spec, sel.fit.aic, lm.p_value);
        records.push(SeriesRecord {
            name: name.to_string(),
            source: raw[i].source.clone(),
            raw_obs: raw_obs[i],
            dropped_rows: raw[i].dropped_rows,
            window_obs: raw[i].len(),
            use_log: specs[i].use_log,
            log_forced: src.log.is_some(),
            adf,
            differenced: specs[i].differencing_order == 1,
            difference_forced: src.difference.is_some(),
            arma: sel.spec,
            arma_aic: sel.fit.aic,
            arma_candidates: sel.candidates,
            heteroskedastic: lm.heteroskedastic_at_5pct,
            arch_lm: lm,
            scale: ScaleSource::Unconditional,
            garch: None,
        });
    }
    let sample = Sample {
        first_date: transformed.dates[0],
        last_date: *transformed.dates.last().expect("non-empty"),
        aligned_obs: aligned.len(),
        estimation_obs: transformed.len(),
    };
    Ok(Diagnosis {
        transformed,
        records,
        sample,
    })
}

/// The fits requested in `models`, in CCC, DCC, NLARC order. NLARC is seeded
/// from a DCC fit even when DCC itself is not reported.
pub fn fit_models(eps: &DegarchPanel, models: &[ModelKind], opts: &EstimationOptions) -> Result<Vec<CorrFit>> {
    let wants = |k| models.contains(&k);
    let mut fits = Vec::new();
    if wants(ModelKind::Ccc) {
        fits.push(ccc_estimate(eps).map_err(|e| Error::stage("fit-ccc", None, e))?);
    }
    if wants(ModelKind::Dcc) || wants(ModelKind::Nlarc) {
        let dcc = fit_corr_with(eps, ModelKind::Dcc, opts).map_err(|e| Error::stage("fit-dcc", None, e))?;
        if wants(ModelKind::Nlarc) {
            let nlarc = fit_nlarc_from_dcc(eps, &dcc, opts).map_err(|e| Error::stage("fit-nlarc", None, e))?;
            if wants(ModelKind::Dcc) {
                fits.push(dcc);
            }
            fits.push(nlarc);
        } else {
            fits.push(dcc);
        }
    }
    Ok(fits)
}

pub fn lr_tests(fits: &[CorrFit]) -> Result<Table2Tests> {
    let get = |k| fits.iter().find(|f| f.kind == k);
    let mut tests = Table2Tests::default();
    if let (Some(c), Some(d)) = (get(ModelKind::Ccc), get(ModelKind::Dcc)) {
        tests.dcc_vs_ccc = Some(lr_test(c.loglik, d.loglik, 2)?);
    }
    if let (Some(d), Some(n)) = (get(ModelKind::Dcc), get(ModelKind::Nlarc)) {
        tests.nlarc_vs_dcc = Some(lr_test(d.loglik, n.loglik, 1)?);
    }
    Ok(tests)
}

fn execute(cfg: &PipelineConfig, dir: &Path) -> Result<RunArtifacts> {
    let mut files = Vec::new();
    let Diagnosis {
        transformed,
        mut records,
        sample,
    } = diagnose(cfg)?;
    let specs: Vec<ArmaSpec> = records.iter().map(|r| r.arma).collect();
    let flags: Vec<bool> = records.iter().map(|r| r.heteroskedastic).collect();
    let fs1 = first_step(&transformed, &specs, &flags)?;
    for (rec, (g, scale)) in records.iter_mut().zip(fs1.garch.iter().zip(&fs1.panel.scale)) {
        rec.scale = *scale;
        rec.garch = g.used_garch.then(|| GarchRecord {
            params: g.params,
            std_errors: g.std_errors,
            loglik: g.loglik,
            converged: g.converged,
        });
    }
    let eps = fs1.panel;
    write_table(dir, "table1", &emit_table1(&table1_rows(&records)), &mut files)?;
    let degarch_path = dir.join("degarch.csv");
    let f = fs::File::create(&degarch_path).map_err(|e| Error::io(&degarch_path, e))?;
    write_panel_csv(&eps.dates, &eps.names, &eps.matrix, BufWriter::new(f))?;
    files.push("degarch.csv".into());

    let opts = EstimationOptions::default();
    let fits = fit_models(&eps, &cfg.models, &opts)?;
    for fit in &fits {
        info!("{}: params {:?}, loglik {:.3}", fit.kind, fit.params(), fit.loglik);
    }
    let tests = lr_tests(&fits).map_err(|e| Error::stage("lr-test", None, e))?;
    write_table(dir, "table2", &emit_table2(&fits, &tests)?, &mut files)?;

    let mut paths = Vec::new();
    for fit in &fits {
        let name = format!("paths_{}.csv", fit.kind.label().to_ascii_lowercase());
        write_path_csv(&dir.join(&name), &eps.dates, &eps.names, fit.path())?;
        files.push(name);
        paths.push((fit.kind, fit.path().clone()));
    }
    let rolling = rolling_correlation(&eps, cfg.rolling.window).map_err(|e| Error::stage("rolling", None, e))?;
    write_rolling_csv(&dir.join("rolling.csv"), &rolling)?;
    files.push("rolling.csv".into());

    files.push("manifest.json".into());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        sample,
        series: records,
        settings: Settings::current(&opts),
        fits,
        tests,
        artifacts: files.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_text(&dir.join("manifest.json"), &(json + "\n"))?;
    Ok(RunArtifacts {
        output_dir: cfg.output_dir.clone(),
        manifest,
        degarch: eps,
        paths,
        rolling,
        files: files.iter().map(|f| cfg.output_dir.join(f)).collect(),
    })
}

fn remove_if_exists(p: &Path) -> Result<()> {
    if p.exists() {
        fs::remove_dir_all(p).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

/// Runs the full pipeline. Artifacts are staged and only moved into
/// `output_dir` on success; on failure the staged files, plus `error.txt`,
/// are kept under `output_dir/failed/`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let staging = out.join(STAGING_DIR);
    remove_if_exists(&staging)?;
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    let failed = out.join(FAILED_DIR);
    match execute(cfg, &staging) {
        Ok(run) => {
            for name in &run.manifest.artifacts {
                let (from, to) = (staging.join(name), out.join(name));
                fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
            }
            remove_if_exists(&staging)?;
            remove_if_exists(&failed)?;
            Ok(run)
        }
        Err(e) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                msg.push_str(&format!("\ncaused by: {s}"));
                src = s.source();
            }
            // best effort: the original error matters more than these
            let _ = fs::write(staging.join("error.txt"), msg + "\n");
            let _ = remove_if_exists(&failed);
            let _ = fs::rename(&staging, &failed);
            Err(e)
        }
    }
}

/// Re-runs the configuration recorded in a manifest.
pub fn rerun_manifest(path: impl AsRef<Path>) -> Result<RunArtifacts> {
    run_pipeline(&Manifest::read(path)?.config)
}
