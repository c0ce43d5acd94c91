//! Configuration, pipeline orchestration, verification reports and plots.

pub mod config;
pub mod pipeline;
pub mod plot;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::PerfectSpline;

use config::RunConfig;
use pipeline::Trace;
use report::VerificationReport;

/// Exit status of a verification failure.
pub const EXIT_FAILED: i32 = 1;
/// Exit status of parse, I/O and solver errors.
pub const EXIT_ERROR: i32 = 2;

/// Report file written by `solve`: the verification report plus the
/// pipeline trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub report: VerificationReport,
    pub trace: Trace,
}

#[derive(Clone, Debug)]
pub struct SolveRun {
    pub spline: PerfectSpline,
    pub report: SolveReport,
    pub spline_path: PathBuf,
    pub report_path: PathBuf,
    pub plot: Option<plot::PlotFiles>,
}

fn sibling(config: &Path, suffix: &str) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    config.with_file_name(format!("{stem}.{suffix}"))
}

fn write_json(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Runs the pipeline for one config file.
///
/// Output paths come from the arguments, then the config, and default to
/// `<stem>.spline.json` and `<stem>.report.json` next to the config.
pub fn run_solve(config_path: &Path, out_spline: Option<&Path>, out_report: Option<&Path>) -> Result<SolveRun> {
    let cfg = RunConfig::load(config_path)?;
    let spline_path = out_spline
        .map(Path::to_path_buf)
        .or_else(|| cfg.outputs.spline.clone())
        .unwrap_or_else(|| sibling(config_path, "spline.json"));
    let report_path = out_report
        .map(Path::to_path_buf)
        .or_else(|| cfg.outputs.report.clone())
        .unwrap_or_else(|| sibling(config_path, "report.json"));
    solve_config(&cfg, spline_path, report_path)
}

fn solve_config(cfg: &RunConfig, spline_path: PathBuf, report_path: PathBuf) -> Result<SolveRun> {
    let f = cfg.function()?;
    let problem = cfg.problem()?;
    let out = pipeline::solve_with(&problem, &f, &cfg.tolerances)?;
    let report = SolveReport {
        report: out.report,
        trace: out.trace,
    };
    write_json(&spline_path, &out.spline.to_json()?)?;
    write_json(&report_path, &serde_json::to_string_pretty(&report)?)?;
    let plot = match &cfg.outputs.plot {
        Some(path) => Some(plot::write(&out.spline, &f, cfg.grid, path, cfg.outputs.svg)?),
        None => None,
    };
    Ok(SolveRun {
        spline: out.spline,
        report,
        spline_path,
        report_path,
        plot,
    })
}

fn load_spline(path: &Path) -> Result<PerfectSpline> {
    PerfectSpline::from_json(&fs::read_to_string(path)?)
}

/// Checks a stored spline against a config from scratch.
pub fn run_verify(spline_path: &Path, config_path: &Path) -> Result<VerificationReport> {
    let cfg = RunConfig::load(config_path)?;
    let spline = load_spline(spline_path)?;
    if spline.order() != cfg.r {
        return Err(Error::Config(format!(
            "spline has order {} but the config has r = {}",
            spline.order(),
            cfg.r
        )));
    }
    let f = cfg.function()?;
    Ok(report::verify(&spline, &cfg.problem()?, &f, &cfg.tolerances))
}

pub fn run_plot(spline_path: &Path, config_path: &Path, out: &Path, svg: bool) -> Result<plot::PlotFiles> {
    let cfg = RunConfig::load(config_path)?;
    let spline = load_spline(spline_path)?;
    plot::write(&spline, &cfg.function()?, cfg.grid, out, svg || cfg.outputs.svg)
}

/// Outcome of one config in a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub config: PathBuf,
    pub passed: bool,
    pub xi: Option<f64>,
    pub knots: Option<usize>,
    pub max_residual: Option<f64>,
    pub error_code: Option<String>,
    pub error: Option<String>,
}

impl BatchEntry {
    pub fn exit_code(&self) -> i32 {
        match (self.passed, &self.error_code) {
            (_, Some(_)) => EXIT_ERROR,
            (true, None) => 0,
            (false, None) => EXIT_FAILED,
        }
    }
}

/// Config files directly inside `dir`, sorted; solver outputs are skipped.
pub fn batch_configs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if path.is_file()
            && name.ends_with(".json")
            && !name.ends_with(".spline.json")
            && !name.ends_with(".report.json")
        {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Solves every config in `dir` concurrently. Outputs without a configured
/// path go to `dir/results/`.
pub fn run_batch(dir: &Path) -> Result<Vec<BatchEntry>> {
    let results = dir.join("results");
    let configs = batch_configs(dir)?;
    Ok(configs
        .par_iter()
        .map(|path| {
            let run = RunConfig::load(path).and_then(|cfg| {
                let spline_path = cfg
                    .outputs
                    .spline
                    .clone()
                    .unwrap_or_else(|| sibling(&results.join(path.file_name().unwrap_or_default()), "spline.json"));
                let report_path = cfg
                    .outputs
                    .report
                    .clone()
                    .unwrap_or_else(|| sibling(&results.join(path.file_name().unwrap_or_default()), "report.json"));
                solve_config(&cfg, spline_path, report_path)
            });
            match run {
                Ok(run) => BatchEntry {
                    config: path.clone(),
                    passed: run.report.report.passed,
                    xi: Some(run.spline.amplitude()),
                    knots: Some(run.spline.knots().len()),
                    max_residual: Some(run.report.report.max_residual),
                    error_code: None,
                    error: None,
                },
                Err(e) => BatchEntry {
                    config: path.clone(),
                    passed: false,
                    xi: None,
                    knots: None,
                    max_residual: None,
                    error_code: Some(e.code().to_string()),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
