//! Command line front end.
//!
//! ```text
//! h1flow simulate  --params p.json --grid 0:50:0.1 --paths 30 --seed 1 --out panel.csv
//! h1flow fit       --panel panel.csv --fa fa.json --seed 1 --out fit.json --trace trace.csv
//! h1flow replicate --study study.json --out tables/
//! h1flow curve     --params p.json --grid 0:50:0.1 --out mean.csv --svg mean.svg
//! ```
//!
//! Failures print one JSON object on stderr and exit with 2 (configuration),
//! 3 (data) or 4 (numerical failure).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{H1Error, Result};
use crate::estimator::{fit, fit_grid, fitted_mean_error, replicate_study, FaGrid, FitResult, GridFitReport, StudySpec};
use crate::firefly::FireflyConfig;
use crate::io::{self, PanelFormat};
use crate::process::{H1Params, InitialLaw, TimeGrid};

#[derive(Debug, Parser)]
#[command(name = "h1flow", version, about = "Simulate and fit hyperbolastic type-I diffusion processes")]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate sample paths and write a wide CSV panel.
    Simulate(SimulateArgs),
    /// Fit the process to a panel by maximum likelihood.
    Fit(FitArgs),
    /// Run a replication study and write its error tables.
    Replicate(ReplicateArgs),
    /// Write the mean function on a grid, optionally as an SVG plot.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON with eta, lambda, mu, sigma, x0 and optionally t0 and initial.
    #[arg(long)]
    pub params: PathBuf,
    /// Observation grid as start:end:step; start must equal t0.
    #[arg(long)]
    pub grid: TimeGrid,
    #[arg(long)]
    pub paths: usize,
    #[arg(long, env = "H1FLOW_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub panel: PathBuf,
    /// Panel layout: wide or long.
    #[arg(long, default_value = "wide")]
    pub format: PanelFormat,
    /// Firefly settings: a single configuration, or {"grid": {...}, "refit_n": 60}.
    #[arg(long)]
    pub fa: Option<PathBuf>,
    /// Overrides the seed in the firefly settings.
    #[arg(long, env = "H1FLOW_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-generation swarm trace of the final fit.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Run summary with wall-clock timings.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplicateArgs {
    #[arg(long)]
    pub study: PathBuf,
    /// Overrides the seed in the study file.
    #[arg(long, env = "H1FLOW_SEED")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub grid: TimeGrid,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Process parameters plus an optional non-degenerate initial law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    #[serde(flatten)]
    pub params: H1Params,
    #[serde(default)]
    pub initial: Option<InitialLaw>,
}

impl ParamsFile {
    pub fn initial_law(&self) -> InitialLaw {
        self.initial.unwrap_or(InitialLaw::Degenerate { x0: self.params.curve().x0() })
    }
}

/// Grid search followed by an optional refit with a larger swarm.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub grid: FaGrid,
    #[serde(default)]
    pub refit_n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub enum FaSpec {
    Single(FireflyConfig),
    Grid(GridSpec),
}

impl FaSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("grid").is_some() {
            Ok(FaSpec::Grid(serde_json::from_value(v)?))
        } else {
            Ok(FaSpec::Single(serde_json::from_value(v)?))
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| H1Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(H1Error::Config(format!("input file {} does not exist", path.display())))
    }
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_input(path)?;
    serde_json::from_str(&text)
        .map_err(|e| H1Error::Config(format!("{}: {e}", path.display())))
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let pf: ParamsFile = load_json(&a.params)?;
    let times = a.grid.points()?;
    let panel = pf.params.simulate(&pf.initial_law(), &times, a.paths, a.seed)?;
    io::write_panel(&a.out, &panel, PanelFormat::Wide)
}

/// Contents of `fit.json` for a grid search.
#[derive(Debug, Serialize)]
struct GridOutput<'a> {
    #[serde(flatten)]
    report: &'a GridFitReport,
    best_cell: crate::estimator::Cell,
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    check_input(&a.panel)?;
    let panel = io::read_panel(&a.panel, a.format)?;
    let spec = match &a.fa {
        Some(p) => FaSpec::from_json(&read_input(p)?)
            .map_err(|e| H1Error::Config(format!("{}: {e}", p.display())))?,
        None => FaSpec::Single(FireflyConfig::default()),
    };
    let start = Instant::now();
    let (final_fit, mean_error): (FitResult, f64) = match spec {
        FaSpec::Single(mut cfg) => {
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            let f = fit(&panel, &cfg)?;
            let err = fitted_mean_error(&panel, &f)?;
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                fit: &'a FitResult,
                fitted_mean_error: f64,
            }
            io::write_json(&a.out, &Out { fit: &f, fitted_mean_error: err })?;
            (f, err)
        }
        FaSpec::Grid(g) => {
            let seed = a.seed.unwrap_or(g.seed);
            let report = fit_grid(&panel, &g.grid, seed, g.refit_n)?;
            let best_cell = report.grid[report.best].cell;
            io::write_json(&a.out, &GridOutput { report: &report, best_cell })?;
            let fin = report.final_fit();
            (fin.fit.clone(), fin.mean_error)
        }
    };
    if let Some(t) = &a.trace {
        io::write_atomic(t, &io::trace_csv(&final_fit.trace)?)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let summary = json!({
        "duration_seconds": elapsed,
        "final_fit_seconds": final_fit.duration.as_secs_f64(),
        "fo_value": final_fit.fo_value,
        "fitted_mean_error": mean_error,
        "notes": final_fit.notes,
    });
    if let Some(s) = &a.summary {
        io::write_json(s, &summary)?;
    }
    eprintln!("{summary}");
    Ok(())
}

pub fn cmd_replicate(a: &ReplicateArgs) -> Result<()> {
    let mut spec: StudySpec = load_json(&a.study)?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let start = Instant::now();
    let report = replicate_study(&spec)?;
    let files = io::write_study_tables(&a.out, &report)?;
    io::write_json(
        &a.out.join("summary.json"),
        &json!({
            "study": spec,
            "truth": report.truth,
            "cells": report.cells,
            "files": files,
            "duration_seconds": start.elapsed().as_secs_f64(),
        }),
    )
}

pub fn cmd_curve(a: &CurveArgs) -> Result<()> {
    let pf: ParamsFile = load_json(&a.params)?;
    let times = a.grid.points()?;
    let init = pf.initial_law();
    let mean = times
        .iter()
        .map(|&t| pf.params.mean_fn(&init, t))
        .collect::<Result<Vec<_>>>()?;
    io::write_atomic(&a.out, &io::series_csv("mean", &times, &mean)?)?;
    if let Some(svg) = &a.svg {
        io::write_atomic(svg, io::line_svg("mean function", &times, &mean)?.as_bytes())?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(H1Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| H1Error::Config(format!("cannot configure threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Replicate(a) => cmd_replicate(a),
        Command::Curve(a) => cmd_curve(a),
    }
}

/// Machine-readable error report.
pub fn error_json(e: &H1Error) -> serde_json::Value {
    let class = e.class();
    json!({ "error": class.as_str(), "exit_code": class.exit_code(), "message": e.to_string() })
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                print!("{e}");
            } else {
                eprintln!("{}", json!({ "error": "config", "exit_code": 2, "message": e.to_string() }));
            }
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.class().exit_code()
        }
    }
}
