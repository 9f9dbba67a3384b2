use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use condcorr::correlation::{fit_corr, DccParams, ModelKind, NlarcParams};
use condcorr::data::{read_panel_csv, write_panel_csv, AlignedPanel};
use condcorr::diagnostics::{adf_test, arch_lm_test, default_max_lag, DEFAULT_ARCH_LAGS};
use condcorr::error::{Error, Result};
use condcorr::inference::{aic, lr_test, rolling_correlation};
use condcorr::linalg::RowMatrix;
use condcorr::pipeline::{
    diagnose, emit_table2, fmt3, fmt_se, ingest, lr_tests, recovery_table, rerun_manifest, run_pipeline,
    write_path_csv, write_rolling_csv, Manifest, PipelineConfig, Table,
};
use condcorr::simulation::{
    business_days, recovery_experiment, simulate_corr_panel, simulate_garch, SimKind, SimSpec, DEFAULT_BURN_IN,
};
use condcorr::volatility::{degarch, fit_garch, DegarchPanel, GarchParams};

/// Two-step conditional correlation estimation (GARCH, then CCC/DCC/NLARC).
#[derive(Parser)]
#[command(name = "condcorr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, window and align the configured series; write the panel CSV.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ADF, ARMA selection and ARCH-LM per series (Table 1).
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        /// Also write the table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fit GARCH(1,1) to every column of a panel CSV.
    FitGarch {
        #[arg(long)]
        input: PathBuf,
        /// Write the de-GARCHed panel here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit correlation models to a de-GARCHed panel CSV.
    FitCorr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ccc,dcc,nlarc")]
        models: Vec<ModelKind>,
        /// Directory for `paths_<model>.csv` files.
        #[arg(long)]
        paths: Option<PathBuf>,
    },
    /// Hypothesis tests.
    #[command(subcommand)]
    Test(TestCommand),
    /// Rolling-window correlations of a de-GARCHed panel CSV.
    Rolling {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate from a model and write the panel CSV.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo parameter recovery.
    Recover {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 100)]
        replications: usize,
        /// Write the summary table as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline from a config (or the config stored in a manifest).
    Run {
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Render stored results.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand)]
enum TestCommand {
    /// Likelihood-ratio test from two log-likelihoods.
    Lr {
        #[arg(long, allow_hyphen_values = true)]
        restricted: f64,
        #[arg(long, allow_hyphen_values = true)]
        unrestricted: f64,
        #[arg(long)]
        dof: usize,
    },
    /// Augmented Dickey-Fuller test on one column of a panel CSV.
    Adf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        max_lag: Option<usize>,
    },
    /// ARCH-LM test on one column of a panel CSV.
    ArchLm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = DEFAULT_ARCH_LAGS)]
        lags: usize,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Per-observation AIC, (2k - 2L) / T.
    Aic {
        #[arg(long, allow_hyphen_values = true)]
        loglik: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
    },
    /// Re-render Table 1 and Table 2 from a manifest.
    Tables {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct SpecArgs {
    /// garch, ccc, dcc or nlarc
    #[arg(long, default_value = "dcc")]
    kind: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    t: usize,
    #[arg(long, default_value_t = 0.05)]
    a: f64,
    #[arg(long, default_value_t = 0.90)]
    b: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Off-diagonal of the equicorrelation target.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// GARCH layer `omega,alpha,beta` applied to every column.
    #[arg(long, value_delimiter = ',')]
    garch: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SpecArgs {
    /// Bad values typed on the command line are input errors, not numerical ones.
    fn build(&self) -> Result<SimSpec> {
        self.try_build().map_err(|e| match e {
            Error::InvalidParams(m) => Error::InvalidInput(m),
            other => other,
        })
    }

    fn try_build(&self) -> Result<SimSpec> {
        let layer = match &self.garch {
            Some(v) if v.len() == 3 => Some(GarchParams::new(v[0], v[1], v[2])?),
            Some(_) => return Err(Error::InvalidInput("--garch takes omega,alpha,beta".into())),
            None => None,
        };
        let r_bar = SimSpec::equicorrelation(self.n, self.rho);
        let spec = match self.kind.as_str() {
            "garch" => {
                let g = layer.ok_or_else(|| Error::InvalidInput("--kind garch needs --garch omega,alpha,beta".into()))?;
                return Ok(SimSpec::garch(g, self.t, self.seed).with_burn_in(self.burn_in));
            }
            "ccc" => SimSpec::ccc(r_bar, self.n, self.t, self.seed),
            "dcc" => SimSpec::dcc(DccParams::new(self.a, self.b)?, r_bar, self.n, self.t, self.seed),
            "nlarc" => SimSpec::nlarc(NlarcParams::new(self.a, self.b, self.phi)?, r_bar, self.n, self.t, self.seed),
            other => return Err(Error::InvalidInput(format!("unknown kind `{other}`"))),
        };
        let spec = spec.with_burn_in(self.burn_in);
        Ok(match layer {
            Some(g) => spec.with_garch_layers(vec![Some(g); self.n]),
            None => spec,
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_panel(path: &Path) -> Result<AlignedPanel> {
    let f = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_panel_csv(f)
}

fn column(panel: &AlignedPanel, name: &str) -> Result<Vec<f64>> {
    let i = panel
        .names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::InvalidInput(format!("no column `{name}`")))?;
    Ok(panel.column(i))
}

fn print_table(t: &Table) {
    print!("{}", t.to_text());
}

fn write_table_csv(t: &Table, path: &Path) -> Result<()> {
    t.write_csv(create(path)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { config, out } => {
            let cfg = PipelineConfig::from_file(&config)?;
            let ing = ingest(&cfg)?;
            for (s, raw) in ing.series.iter().zip(&ing.raw_obs) {
                eprintln!("{}: {raw} rows, {} in window, {} dropped", s.name, s.len(), s.dropped_rows);
            }
            let p = &ing.aligned;
            match out {
                Some(path) => write_panel_csv(&p.dates, &p.names, &p.matrix, create(&path)?)?,
                None => write_panel_csv(&p.dates, &p.names, &p.matrix, io::stdout().lock())?,
            }
        }
        Command::Diagnose { config, csv } => {
            let cfg = PipelineConfig::from_file(&config)?;
            let d = diagnose(&cfg)?;
            let table = d.table1();
            print_table(&table);
            for r in &d.records {
                println!(
                    "{}: log {}, ADF {} (p {}), {}",
                    r.name,
                    r.use_log,
                    fmt3(r.adf.statistic),
                    fmt3(r.adf.p_value),
                    if r.differenced { "differenced" } else { "level" }
                );
            }
            if let Some(path) = csv {
                write_table_csv(&table, &path)?;
            }
        }
        Command::FitGarch { input, out } => {
            let panel = read_panel(&input)?;
            let mut cols = Vec::new();
            println!("{:<16} {:>10} {:>10} {:>10} {:>12}", "series", "omega", "alpha", "beta", "loglik");
            for (i, name) in panel.names.iter().enumerate() {
                let y = panel.column(i);
                let fit = fit_garch(&y).map_err(|e| Error::Stage {
                    stage: "fit-garch".into(),
                    series: Some(name.clone()),
                    source: Box::new(e),
                })?;
                let p = fit.params;
                println!("{name:<16} {:>10} {:>10} {:>10} {:>12}", fmt3(p.omega), fmt3(p.alpha), fmt3(p.beta), fmt3(fit.loglik));
                let se = fit.std_errors;
                println!("{:<16} {:>10} {:>10} {:>10}", "", fmt_se(se[0]), fmt_se(se[1]), fmt_se(se[2]));
                cols.push(degarch(&y, &fit)?);
            }
            if let Some(path) = out {
                write_panel_csv(&panel.dates, &panel.names, &RowMatrix::from_columns(&cols), create(&path)?)?;
            }
        }
        Command::FitCorr { input, models, paths } => {
            let eps = DegarchPanel::from_panel(read_panel(&input)?);
            let mut fits = Vec::new();
            for kind in models {
                fits.push(fit_corr(&eps, kind)?);
            }
            let tests = lr_tests(&fits)?;
            print_table(&emit_table2(&fits, &tests)?);
            if let Some(dir) = paths {
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
                for f in &fits {
                    let p = dir.join(format!("paths_{}.csv", f.kind.label().to_ascii_lowercase()));
                    write_path_csv(&p, &eps.dates, &eps.names, f.path())?;
                }
            }
        }
        Command::Test(TestCommand::Lr {
            restricted,
            unrestricted,
            dof,
        }) => {
            let r = lr_test(restricted, unrestricted, dof)?;
            println!(
                "LR {} (chi2(0.1, {dof}) = {}), p = {}, {}",
                fmt3(r.statistic),
                fmt3(r.critical_value_10pct),
                fmt3(r.p_value),
                if r.reject { "reject at 10%" } else { "do not reject at 10%" }
            );
        }
        Command::Test(TestCommand::Adf { input, column: name, max_lag }) => {
            let y = column(&read_panel(&input)?, &name)?;
            let r = adf_test(&y, max_lag.unwrap_or_else(|| default_max_lag(y.len())))?;
            println!("ADF {} with {} lags (n = {}), p = {}", fmt3(r.statistic), r.lags_used, r.nobs, fmt3(r.p_value));
            for (level, cv) in r.critical_values {
                println!("  {:>3}% critical value {}", (level * 100.0).round(), fmt3(cv));
            }
            println!("unit root {} at 5%", if r.reject_unit_root_at_5pct { "rejected" } else { "not rejected" });
        }
        Command::Test(TestCommand::ArchLm { input, column: name, lags }) => {
            let y = column(&read_panel(&input)?, &name)?;
            let m = condcorr::stats::mean(&y);
            let resid: Vec<f64> = y.iter().map(|v| v - m).collect();
            let r = arch_lm_test(&resid, lags)?;
            println!("ARCH-LM {} with {lags} lags, p = {}", fmt3(r.statistic), fmt3(r.p_value));
        }
        Command::Rolling { input, window, out } => {
            let eps = DegarchPanel::from_panel(read_panel(&input)?);
            let r = rolling_correlation(&eps, window)?;
            let path = out.unwrap_or_else(|| PathBuf::from("rolling.csv"));
            write_rolling_csv(&path, &r)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Simulate { spec, out } => {
            let spec = spec.build()?;
            let (names, data) = if spec.kind == SimKind::GarchUnivariate {
                (vec!["y".to_string()], RowMatrix::from_columns(&[simulate_garch(&spec)?]))
            } else {
                ((0..spec.n).map(|i| format!("s{i}")).collect(), simulate_corr_panel(&spec)?.data)
            };
            let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
            let dates = business_days(start, spec.t);
            match out {
                Some(path) => write_panel_csv(&dates, &names, &data, create(&path)?)?,
                None => write_panel_csv(&dates, &names, &data, io::stdout().lock())?,
            }
        }
        Command::Recover { spec, replications, out } => {
            let report = recovery_experiment(&spec.build()?, replications)?;
            let table = recovery_table(&report);
            print_table(&table);
            println!("failures {}, converged {}/{}", report.failures, report.converged, replications);
            if let Some(path) = out {
                write_table_csv(&table, &path)?;
            }
        }
        Command::Run { config, manifest } => {
            let run = match (config, manifest) {
                (Some(c), _) => run_pipeline(&PipelineConfig::from_file(&c)?)?,
                (None, Some(m)) => rerun_manifest(&m)?,
                (None, None) => unreachable!("clap enforces one of them"),
            };
            print_table(&run.manifest.table1());
            println!();
            print_table(&run.manifest.table2()?);
            eprintln!("results in {}", run.output_dir.display());
        }
        Command::Report(ReportCommand::Aic { loglik, k, t }) => {
            if t == 0 {
                return Err(Error::InvalidInput("T must be positive".into()));
            }
            println!("{}", fmt3(aic(loglik, k, t)));
        }
        Command::Report(ReportCommand::Tables { manifest }) => {
            let m = Manifest::read(&manifest)?;
            print_table(&m.table1());
            println!();
            print_table(&m.table2()?);
        }
    }
    io::stdout().flush().ok();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let s_msg = s.to_string();
                if !msg.contains(&s_msg) {
                    msg.push_str(&format!(": {s_msg}"));
                }
                src = s.source();
            }
            error!("{msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
