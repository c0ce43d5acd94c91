//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string; the `*_data` functions
//! behind them are plain Rust so they can be tested natively.

use std::f64::consts::TAU;

use perfspline::app::config::{FunctionSpec, RunConfig};
use perfspline::app::pipeline;
use perfspline::kernels::{BernoulliKernel, SmoothingKernel};
use perfspline::spectral::{count_sign_changes, PeriodicFunction};
use perfspline::Error;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn abscissae(samples: usize) -> Vec<f64> {
    (0..=samples).map(|i| TAU * i as f64 / samples as f64).collect()
}

fn check_samples(samples: usize) -> Result<(), Error> {
    if (2..=20_000).contains(&samples) {
        Ok(())
    } else {
        Err(Error::Config(format!("samples must lie in 2..=20000, got {samples}")))
    }
}

#[derive(Debug, Serialize)]
pub struct NodeView {
    pub x: f64,
    pub half_width: f64,
    pub target: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveView {
    pub passed: bool,
    pub diagnosis: String,
    pub route: String,
    pub r: u32,
    pub xi: f64,
    pub offset: f64,
    pub knots: Vec<f64>,
    pub f_r_norm: f64,
    pub max_residual: f64,
    pub nodes: Vec<NodeView>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub s_r: Vec<f64>,
}

/// Solves a run config and samples `s`, `f` and `s^(r)` on a closed period.
pub fn solve_data(config_json: &str, samples: usize) -> Result<SolveView, Error> {
    check_samples(samples)?;
    let cfg = RunConfig::from_json(config_json)?;
    let f = cfg.function()?;
    let problem = cfg.problem()?;
    let out = pipeline::solve_with(&problem, &f, &cfg.tolerances)?;
    let spline = &out.spline;
    let x = abscissae(samples);
    let nodes = cfg
        .nodes
        .iter()
        .zip(&out.report.nodes)
        .map(|(spec, res)| NodeView {
            x: spec.x,
            half_width: spec.half_width,
            target: res.target,
            residual: res.residual,
        })
        .collect();
    Ok(SolveView {
        passed: out.report.passed,
        diagnosis: out.report.diagnosis.clone(),
        route: serde_json::to_value(out.trace.route)?.as_str().unwrap_or_default().to_string(),
        r: spline.order(),
        xi: spline.amplitude(),
        offset: spline.offset(),
        knots: spline.knots().to_vec(),
        f_r_norm: out.report.f_r_norm,
        max_residual: out.report.max_residual,
        nodes,
        s: x.iter().map(|&t| spline.eval(t)).collect(),
        f: x.iter().map(|&t| f.evaluate(t)).collect(),
        s_r: x.iter().map(|&t| spline.derivative(t, spline.order())).collect(),
        x,
    })
}

#[derive(Debug, Serialize)]
pub struct KernelView {
    pub x: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub series: Vec<f64>,
    pub max_difference: f64,
}

/// Bernoulli kernel `B_r` in closed form against its series truncated at `J`.
pub fn kernel_data(order: u32, bandwidth: usize, samples: usize) -> Result<KernelView, Error> {
    check_samples(samples)?;
    if bandwidth > 1 << 16 {
        return Err(Error::Config(format!("bandwidth {bandwidth} exceeds 65536")));
    }
    let kernel = BernoulliKernel::new(order, bandwidth)?;
    let series_fn = kernel.as_function();
    let x = abscissae(samples);
    let closed_form: Vec<f64> = x.iter().map(|&t| kernel.closed_form(t)).collect();
    let series: Vec<f64> = x.iter().map(|&t| series_fn.evaluate(t)).collect();
    let max_difference = closed_form
        .iter()
        .zip(&series)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(KernelView {
        x,
        closed_form,
        series,
        max_difference,
    })
}

#[derive(Debug, Serialize)]
pub struct SmoothingView {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub sign_changes_f: usize,
    pub sign_changes_smoothed: usize,
}

/// `A_ε ∗ f` next to `f`, with the sign changes of each.
pub fn smoothing_data(function_json: &str, eps: f64, samples: usize) -> Result<SmoothingView, Error> {
    check_samples(samples)?;
    let spec: FunctionSpec = serde_json::from_str(function_json)?;
    let f: PeriodicFunction = spec.to_function()?;
    let smoothed = SmoothingKernel::new(eps)?.apply(&f);
    let x = abscissae(samples);
    let fv: Vec<f64> = x.iter().map(|&t| f.evaluate(t)).collect();
    let sv: Vec<f64> = x.iter().map(|&t| smoothed.evaluate(t)).collect();
    // The closing sample repeats the first one.
    let count = |v: &[f64]| count_sign_changes(&v[..samples], 1e-12).unwrap_or(0);
    Ok(SmoothingView {
        sign_changes_f: count(&fv),
        sign_changes_smoothed: count(&sv),
        x,
        f: fv,
        smoothed: sv,
    })
}

fn to_js<T: Serialize>(value: Result<T, Error>) -> Result<String, JsValue> {
    value
        .and_then(|v| Ok(serde_json::to_string(&v)?))
        .map_err(|e| JsValue::from_str(&format!("error[{}]: {e}", e.code())))
}

/// Solves the JSON run config; returns the solution and sampled curves.
#[wasm_bindgen]
pub fn solve(config_json: &str, samples: usize) -> Result<String, JsValue> {
    to_js(solve_data(config_json, samples))
}

/// Samples of the Bernoulli kernel of the given order, closed form and series.
#[wasm_bindgen]
pub fn kernel(order: u32, bandwidth: usize, samples: usize) -> Result<String, JsValue> {
    to_js(kernel_data(order, bandwidth, samples))
}

/// Samples of `f` and its smoothed version `A_ε ∗ f`.
#[wasm_bindgen]
pub fn smoothing(function_json: &str, eps: f64, samples: usize) -> Result<String, JsValue> {
    to_js(smoothing_data(function_json, eps, samples))
}
