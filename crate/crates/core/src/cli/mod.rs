//! Command-line front end: `meta`, `validate` and `moments` subcommands.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
//! of at least one cell, 3 validation tolerance exceeded.

pub mod config;
pub mod plot;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dominant::DominantModel;
use crate::moments::{MomentEngine, MomentKernel};
use crate::sim::{sample_links, sample_network};

pub use config::{Method, OutputConfig, RunConfig};
pub use table::{Axis, Metadata, ResultTable, Row};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("numerical failure in {count} cell(s); first: {first}")]
    Numerical { count: usize, first: String },

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Numerical { .. } => 2,
            CliError::Validation(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "uplink-meta", version, about = "Uplink SINR meta distribution of Poisson cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the meta distribution on the (ε, θ, γ) grid.
    Meta(Common),
    /// Compare every analytical method with the simulation.
    Validate(Common),
    /// Tabulate moments of the conditional success probability.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Moment orders, comma separated.
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
    },
    /// Print the default configuration as JSON.
    Defaults,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file; all fields are optional.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Methods, comma separated (overrides `methods`).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Number of simulated realizations (overrides `sim.n_realizations`).
    #[arg(long)]
    realizations: Option<usize>,
    /// Root seed of the simulation (overrides `sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the SVG plots.
    #[arg(long)]
    no_svg: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.output {
            cfg.output.dir = dir.clone();
        }
        if let Some(ms) = &self.methods {
            let json = serde_json::to_string(ms).expect("strings serialize");
            let mut parsed: Vec<Method> = serde_json::from_str(&json).map_err(|e| CliError::Config {
                field: "methods".into(),
                message: e.to_string(),
            })?;
            if parsed.is_empty() {
                return Err(CliError::Config {
                    field: "methods".into(),
                    message: "at least one method is required".into(),
                });
            }
            parsed.sort();
            parsed.dedup();
            cfg.methods = parsed;
        }
        if let Some(n) = self.realizations {
            cfg.sim.n_realizations = n;
        }
        if let Some(s) = self.seed {
            cfg.sim.seed = s;
        }
        if self.no_svg {
            cfg.output.svg = false;
        }
        cfg.sim.validate(&cfg.params).map_err(|e| CliError::Config {
            field: "sim".into(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Meta(common) => {
            let cfg = common.load()?;
            let table = cmd_meta(&cfg)?;
            println!("wrote {} rows to {}", table.rows.len(), cfg.csv_path().display());
            Ok(())
        }
        Command::Validate(common) => {
            let cfg = common.load()?;
            let report = cmd_validate(&cfg)?;
            for d in &report.deviations {
                println!(
                    "{:<20} max {:.4} mean {:.4}{}",
                    d.method,
                    d.max_abs_deviation,
                    d.mean_abs_deviation,
                    match (d.tolerance, d.pass) {
                        (Some(t), Some(p)) => format!("  tol {t}  {}", if p { "PASS" } else { "FAIL" }),
                        _ => String::new(),
                    }
                );
            }
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Validation(format!("see {}", cfg.report_path().display())))
            }
        }
        Command::Moments { common, b } => {
            let mut cfg = common.load()?;
            if let Some(b) = b {
                if b.is_empty() || b.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                    return Err(CliError::Config {
                        field: "b".into(),
                        message: "moment orders must be finite and nonnegative".into(),
                    });
                }
                cfg.b_orders = b;
            }
            let table = cmd_moments(&cfg)?;
            println!("wrote {} rows to {}", table.rows.len(), cfg.moments_csv_path().display());
            Ok(())
        }
        Command::Defaults => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default()).expect("config serializes"));
            Ok(())
        }
    }
}

fn metadata(cfg: &RunConfig) -> Metadata {
    Metadata {
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.sim.seed,
        bs_density: cfg.params.bs_density,
        tolerances: cfg.tolerances,
        n_realizations: if cfg.methods.contains(&Method::Mc) { cfg.sim.n_realizations } else { 0 },
        failures: Vec::new(),
        resampled_realizations: 0,
    }
}

/// Values of one method at one (ε, θ) over the γ grid, or an error message.
struct Block {
    values: Result<Vec<(f64, Option<f64>)>, String>,
    runtime_ms: f64,
}

fn timed<F: FnOnce() -> Result<Vec<(f64, Option<f64>)>, String>>(f: F) -> Block {
    let t = Instant::now();
    let values = f();
    Block {
        values,
        runtime_ms: t.elapsed().as_secs_f64() * 1e3,
    }
}

fn analytic_blocks(cfg: &RunConfig, eps: f64, method: Method, kernel: MomentKernel) -> Vec<Block> {
    let p = cfg.params_at(eps);
    let thetas = cfg.thetas_linear();
    match method {
        Method::Proposed => match DominantModel::new(p) {
            Ok(model) => thetas
                .par_iter()
                .map(|&th| timed(|| cfg.gammas.iter().map(|&g| model.meta(th, g).map(|v| (v, None)).map_err(|e| e.to_string())).collect()))
                .collect(),
            Err(e) => thetas.iter().map(|_| Block { values: Err(e.to_string()), runtime_ms: 0.0 }).collect(),
        },
        Method::Beta | Method::Gilpelaez => match MomentEngine::with_tolerances(p, cfg.tolerances) {
            Ok(engine) => thetas
                .par_iter()
                .map(|&th| {
                    timed(|| {
                        if method == Method::Beta {
                            let shape = engine.beta_shape(th, kernel).map_err(|e| e.to_string())?;
                            cfg.gammas.iter().map(|&g| shape.ccdf(g).map(|v| (v, None)).map_err(|e| e.to_string())).collect()
                        } else {
                            let r = engine.gil_pelaez(th, &cfg.gammas, &cfg.gil_pelaez).map_err(|e| e.to_string())?;
                            Ok(r.values.into_iter().zip(r.error_estimates).map(|(v, e)| (v, Some(e))).collect())
                        }
                    })
                })
                .collect(),
            Err(e) => thetas.iter().map(|_| Block { values: Err(e.to_string()), runtime_ms: 0.0 }).collect(),
        },
        Method::Mc => unreachable!("simulation blocks are built separately"),
    }
}

fn mc_blocks(cfg: &RunConfig, eps: f64, resampled: &mut usize) -> Vec<Block> {
    let p = cfg.params_at(eps);
    let t = Instant::now();
    match sample_links(&p, &cfg.sim, &cfg.thetas_linear()) {
        Ok(sample) => {
            *resampled += sample.resampled();
            let m = sample.meta(&cfg.gammas);
            let per = t.elapsed().as_secs_f64() * 1e3 / cfg.theta_db.len() as f64;
            m.values
                .into_iter()
                .zip(m.ci_half_width)
                .map(|(v, c)| Block {
                    values: Ok(v.into_iter().zip(c).map(|(v, c)| (v, Some(c))).collect()),
                    runtime_ms: per,
                })
                .collect()
        }
        Err(e) => cfg.theta_db.iter().map(|_| Block { values: Err(e.to_string()), runtime_ms: 0.0 }).collect(),
    }
}

fn push_blocks(table: &mut ResultTable, name: &str, eps: f64, cfg: &RunConfig, blocks: Vec<Block>) {
    for (block, &theta_db) in blocks.into_iter().zip(&cfg.theta_db) {
        let per = block.runtime_ms / cfg.gammas.len() as f64;
        match block.values {
            Ok(vals) => {
                for (&g, (v, ci)) in cfg.gammas.iter().zip(vals) {
                    table.rows.push(Row { method: name.into(), epsilon: eps, theta_db, x: g, value: Some(v), ci, runtime_ms: per });
                }
            }
            Err(msg) => {
                table.metadata.failures.push(format!("{name} ε={eps} θ={theta_db} dB: {msg}"));
                for &g in &cfg.gammas {
                    table.rows.push(Row { method: name.into(), epsilon: eps, theta_db, x: g, value: None, ci: None, runtime_ms: per });
                }
            }
        }
    }
}

/// Evaluates every configured method on the grid. Failed cells are kept as
/// rows without a value and listed in the metadata.
pub fn compute_meta(cfg: &RunConfig) -> ResultTable {
    let mut table = ResultTable { axis: Axis::Gamma, rows: Vec::new(), metadata: metadata(cfg) };
    let mut resampled = 0;
    for &eps in &cfg.epsilons {
        for &m in &cfg.methods {
            let blocks = match m {
                Method::Mc => mc_blocks(cfg, eps, &mut resampled),
                _ => analytic_blocks(cfg, eps, m, cfg.moment_kernel),
            };
            push_blocks(&mut table, m.name(), eps, cfg, blocks);
        }
    }
    table.metadata.resampled_realizations = resampled;
    table
}

fn numerical_outcome(table: &ResultTable) -> Result<(), CliError> {
    match table.metadata.failures.first() {
        None => Ok(()),
        Some(first) => Err(CliError::Numerical { count: table.metadata.failures.len(), first: first.clone() }),
    }
}

fn write_meta_outputs(cfg: &RunConfig, table: &ResultTable) -> Result<(), CliError> {
    let csv = cfg.csv_path();
    table.write(&csv).map_err(io_err(&csv))?;
    if cfg.output.svg {
        write_plots(cfg, table)?;
    }
    if cfg.output.dump_realizations > 0 {
        let dir = cfg.output.dir.join("realizations");
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for i in 0..cfg.output.dump_realizations {
            let (r, _) = sample_network(&cfg.params, &cfg.sim, i as u64).map_err(|e| CliError::Numerical { count: 1, first: e.to_string() })?;
            let path = dir.join(format!("realization_{i:04}.csv"));
            r.write_csv(&path).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

/// Runs the configured methods and writes the CSV, metadata and plots.
pub fn cmd_meta(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let table = compute_meta(cfg);
    write_meta_outputs(cfg, &table)?;
    numerical_outcome(&table)?;
    Ok(table)
}

fn write_plots(cfg: &RunConfig, table: &ResultTable) -> Result<(), CliError> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut method_names: Vec<&str> = Vec::new();
    for r in &table.rows {
        if !method_names.contains(&r.method.as_str()) {
            method_names.push(&r.method);
        }
    }
    for &eps in &cfg.epsilons {
        let mut series = Vec::new();
        for (ti, &th) in cfg.theta_db.iter().enumerate() {
            for m in &method_names {
                let points: Vec<(f64, f64)> = table
                    .values(m, eps)
                    .filter(|r| r.theta_db == th)
                    .map(|r| (r.x, r.value.unwrap_or(f64::NAN)))
                    .collect();
                series.push((ti, plot::Series { label: format!("{m}, θ={th} dB"), points }));
            }
        }
        let svg = plot::line_plot(&format!("Meta distribution, ε = {eps}"), "reliability threshold γ", "P(P_s > γ)", &series);
        let path = dir.join(format!("meta_eps{eps}.svg"));
        std::fs::write(&path, svg).map_err(io_err(&path))?;
    }
    for &g in &cfg.output.plot_gammas {
        let mut series = Vec::new();
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            for m in &method_names {
                let points: Vec<(f64, f64)> = table
                    .values(m, eps)
                    .filter(|r| r.x == g)
                    .map(|r| (r.theta_db, r.value.unwrap_or(f64::NAN)))
                    .collect();
                series.push((ei, plot::Series { label: format!("{m}, ε={eps}"), points }));
            }
        }
        let svg = plot::line_plot(&format!("Meta distribution, γ = {g}"), "SINR threshold θ (dB)", "P(P_s > γ)", &series);
        let path = dir.join(format!("meta_gamma{g}.svg"));
        std::fs::write(&path, svg).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Deviation of one analytical method from the simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub method: String,
    pub max_abs_deviation: f64,
    pub mean_abs_deviation: f64,
    pub cells: usize,
    /// `None` for informational entries.
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
    pub by_epsilon: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub reference: &'static str,
    pub deviations: Vec<Deviation>,
    pub pass: bool,
    pub metadata: Metadata,
}

fn deviation(table: &ResultTable, cfg: &RunConfig, method: &str, tolerance: Option<f64>) -> Deviation {
    let mut all = Vec::new();
    let mut by_eps = Vec::new();
    let mut missing = false;
    for &eps in &cfg.epsilons {
        let mut worst: f64 = 0.0;
        for r in table.values(method, eps) {
            match (r.value, table.lookup("mc", eps, r.theta_db, r.x)) {
                (Some(a), Some(b)) => {
                    let d = (a - b).abs();
                    worst = worst.max(d);
                    all.push(d);
                }
                _ => missing = true,
            }
        }
        by_eps.push((eps, worst));
    }
    let max = all.iter().copied().fold(0.0, f64::max);
    let mean = if all.is_empty() { f64::NAN } else { all.iter().sum::<f64>() / all.len() as f64 };
    Deviation {
        method: method.into(),
        max_abs_deviation: if missing { f64::NAN } else { max },
        mean_abs_deviation: mean,
        cells: all.len(),
        tolerance,
        pass: tolerance.map(|t| !missing && max <= t),
        by_epsilon: by_eps,
    }
}

/// Compares each analytical method with the simulation and writes the JSON
/// report. The beta approximation is reported under both moment kernels.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    if !cfg.methods.contains(&Method::Mc) {
        return Err(CliError::Config {
            field: "methods".into(),
            message: "validation requires simulation reference".into(),
        });
    }
    let mut table = compute_meta(cfg);
    let other = match cfg.moment_kernel {
        MomentKernel::PgflExact => MomentKernel::ScaledLaplace,
        MomentKernel::ScaledLaplace => MomentKernel::PgflExact,
    };
    let other_name = format!("beta-{}", kernel_name(other));
    if cfg.methods.contains(&Method::Beta) {
        for &eps in &cfg.epsilons {
            let blocks = analytic_blocks(cfg, eps, Method::Beta, other);
            push_blocks(&mut table, &other_name, eps, cfg, blocks);
        }
    }
    write_meta_outputs(cfg, &table)?;

    let mut deviations = Vec::new();
    for &m in cfg.methods.iter().filter(|m| **m != Method::Mc) {
        deviations.push(deviation(&table, cfg, m.name(), cfg.validation.get(&m).copied()));
    }
    if cfg.methods.contains(&Method::Beta) {
        deviations.push(deviation(&table, cfg, &other_name, None));
    }
    let pass = deviations.iter().all(|d| d.pass != Some(false));
    let report = ValidationReport { reference: "mc", deviations, pass, metadata: table.metadata.clone() };
    let path = cfg.report_path();
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
    numerical_outcome(&table)?;
    Ok(report)
}

fn kernel_name(k: MomentKernel) -> &'static str {
    match k {
        MomentKernel::PgflExact => "pgfl-exact",
        MomentKernel::ScaledLaplace => "scaled-laplace",
    }
}

/// Moments `E[P_s^b]` under both kernels, plus the simulated moments when `mc`
/// is among the methods (`ci` is the 95% half-width).
pub fn compute_moments(cfg: &RunConfig) -> ResultTable {
    let mut table = ResultTable { axis: Axis::B, rows: Vec::new(), metadata: metadata(cfg) };
    let thetas = cfg.thetas_linear();
    for &eps in &cfg.epsilons {
        let p = cfg.params_at(eps);
        for kernel in [MomentKernel::PgflExact, MomentKernel::ScaledLaplace] {
            let name = kernel_name(kernel);
            let engine = MomentEngine::with_tolerances(p, cfg.tolerances);
            let cells: Vec<(f64, f64, Result<f64, String>, f64)> = thetas
                .par_iter()
                .zip(&cfg.theta_db)
                .flat_map_iter(|(&th, &db)| {
                    cfg.b_orders.iter().map(move |&b| (db, th, b))
                })
                .map(|(db, th, b)| {
                    let t = Instant::now();
                    let v = match &engine {
                        Ok(e) => e.real_moment(th, b, kernel).map_err(|e| e.to_string()),
                        Err(e) => Err(e.to_string()),
                    };
                    (db, b, v, t.elapsed().as_secs_f64() * 1e3)
                })
                .collect();
            for (db, b, v, ms) in cells {
                if let Err(msg) = &v {
                    table.metadata.failures.push(format!("{name} ε={eps} θ={db} dB b={b}: {msg}"));
                }
                table.rows.push(Row { method: name.into(), epsilon: eps, theta_db: db, x: b, value: v.ok(), ci: None, runtime_ms: ms });
            }
        }
        if cfg.methods.contains(&Method::Mc) {
            let t = Instant::now();
            let sample = sample_links(&p, &cfg.sim, &thetas);
            let ms = t.elapsed().as_secs_f64() * 1e3 / (thetas.len() * cfg.b_orders.len()) as f64;
            match sample {
                Ok(s) => {
                    table.metadata.resampled_realizations += s.resampled();
                    for (ti, &db) in cfg.theta_db.iter().enumerate() {
                        for &b in &cfg.b_orders {
                            let m = s.mean_of(ti, |lp| if b == 0.0 { 1.0 } else { (b * lp).exp() });
                            table.rows.push(Row {
                                method: "mc".into(),
                                epsilon: eps,
                                theta_db: db,
                                x: b,
                                value: Some(m.mean),
                                ci: Some(1.959_963_984_540_054 * m.std_error),
                                runtime_ms: ms,
                            });
                        }
                    }
                }
                Err(e) => table.metadata.failures.push(format!("mc ε={eps}: {e}")),
            }
        }
    }
    table
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let table = compute_moments(cfg);
    let path = cfg.moments_csv_path();
    table.write(&path).map_err(io_err(&path))?;
    numerical_outcome(&table)?;
    Ok(table)
}
