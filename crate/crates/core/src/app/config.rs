//! JSON run configuration: one file describes one problem.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{MeanInterpolationProblem, Node, SolverSettings};
use crate::kernels::{WeightFunction, WeightKind};
use crate::spectral::PeriodicFunction;

use super::report::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub x: f64,
    pub weight: WeightKind,
    #[serde(default)]
    pub half_width: f64,
}

/// `a cos jx + b sin jx`; for `j = 0` only `a` counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub j: usize,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Harmonic { terms: Vec<Harmonic> },
    Builtin { name: String },
}

/// Names accepted by [`FunctionSpec::Builtin`].
pub const BUILTINS: &[&str] = &["sin", "cos", "sin+half", "square5"];

impl FunctionSpec {
    pub fn harmonics(&self) -> Result<Vec<Harmonic>> {
        let h = |j, a, b| Harmonic { j, a, b };
        match self {
            FunctionSpec::Harmonic { terms } => {
                if terms.iter().any(|t| !t.a.is_finite() || !t.b.is_finite()) {
                    return Err(Error::Config("harmonic amplitudes must be finite".into()));
                }
                Ok(terms.clone())
            }
            FunctionSpec::Builtin { name } => match name.as_str() {
                "sin" => Ok(vec![h(1, 0.0, 1.0)]),
                "cos" => Ok(vec![h(1, 1.0, 0.0)]),
                "sin+half" => Ok(vec![h(1, 0.0, 1.0), h(2, 0.5, 0.0)]),
                "square5" => Ok(vec![h(1, 0.0, 1.0), h(3, 0.0, 1.0 / 3.0), h(5, 0.0, 0.2)]),
                other => Err(Error::Config(format!(
                    "unknown builtin function {other:?}, expected one of {BUILTINS:?}"
                ))),
            },
        }
    }

    pub fn to_function(&self) -> Result<PeriodicFunction> {
        let terms: Vec<(usize, f64, f64)> = self.harmonics()?.iter().map(|t| (t.j, t.a, t.b)).collect();
        Ok(PeriodicFunction::from_harmonics(&terms))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub spline: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub svg: bool,
}

fn default_smoothing() -> f64 {
    SolverSettings::default().smoothing
}

fn default_grid() -> usize {
    SolverSettings::default().grid
}

fn default_bandwidth() -> usize {
    SolverSettings::default().bandwidth
}

fn default_zero_tol() -> f64 {
    SolverSettings::default().zero_tol
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub r: u32,
    pub m: usize,
    pub nodes: Vec<NodeSpec>,
    pub function: FunctionSpec,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: usize,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunConfig {
    /// Parses and validates; a config that cannot form a problem is
    /// rejected here.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config, resolving relative output paths against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.outputs.spline, &mut cfg.outputs.report, &mut cfg.outputs.plot]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if [t.interpolation, t.mean_zero, t.extremal, t.refine]
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::Config("tolerances must be positive and finite".into()));
        }
        let f = self.function()?;
        if f.bandwidth() > self.bandwidth {
            return Err(Error::Config(format!(
                "function bandwidth {} exceeds configured bandwidth {}",
                f.bandwidth(),
                self.bandwidth
            )));
        }
        self.problem_for(&f).map(|_| ())
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            smoothing: self.smoothing,
            grid: self.grid,
            bandwidth: self.bandwidth,
            zero_tol: self.zero_tol,
        }
    }

    pub fn nodes(&self) -> Result<Vec<Node>> {
        self.nodes
            .iter()
            .map(|n| Ok(Node::new(n.x, WeightFunction::new(n.weight, n.half_width)?)))
            .collect()
    }

    pub fn function(&self) -> Result<PeriodicFunction> {
        self.function.to_function()
    }

    pub fn problem(&self) -> Result<MeanInterpolationProblem> {
        self.problem_for(&self.function()?)
    }

    fn problem_for(&self, f: &PeriodicFunction) -> Result<MeanInterpolationProblem> {
        MeanInterpolationProblem::for_function(self.r, self.m, self.nodes()?, f, self.settings())
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIN: &str = r#"{
        "r": 2, "m": 1,
        "nodes": [
            {"x": 1.5707963267948966, "weight": "box", "half_width": 0.1},
            {"x": 3.141592653589793, "weight": "box", "half_width": 0.1},
            {"x": 4.71238898038469, "weight": "box", "half_width": 0.1}
        ],
        "function": {"kind": "builtin", "name": "sin"}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::from_json(SIN).unwrap();
        assert_eq!(cfg.grid, 2048);
        assert_eq!(cfg.bandwidth, 4096);
        assert_eq!(cfg.smoothing, 1e-3);
        assert_eq!(cfg.tolerances, Tolerances::default());
        let p = cfg.problem().unwrap();
        assert!((p.targets()[0] - 0.1f64.sin() / 0.1).abs() < 1e-14);
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overlapping_supports_rejected() {
        let text = SIN.replace("3.141592653589793", "1.7");
        assert!(matches!(RunConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_unknown_builtin_and_fields() {
        let text = SIN.replace("\"sin\"", "\"tan\"");
        assert!(matches!(RunConfig::from_json(&text), Err(Error::Config(_))));
        let text = SIN.replace("\"r\": 2", "\"r\": 2, \"degrees\": true");
        assert!(matches!(RunConfig::from_json(&text), Err(Error::Json(_))));
    }

    #[test]
    fn harmonic_function_and_bandwidth_limit() {
        let text = SIN.replace(
            r#"{"kind": "builtin", "name": "sin"}"#,
            r#"{"kind": "harmonic", "terms": [{"j": 0, "a": 2.5}, {"j": 3, "b": -1.0}]}"#,
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        let f = cfg.function().unwrap();
        assert!((f.evaluate(0.4) - (2.5 - (1.2f64).sin())).abs() < 1e-14);
        let narrow = text.replace("\"r\": 2", "\"r\": 2, \"bandwidth\": 2");
        assert!(RunConfig::from_json(&narrow).is_err());
    }

    #[test]
    fn relative_outputs_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let text = SIN.replace("\"r\": 2", "\"r\": 2, \"outputs\": {\"spline\": \"out/s.json\"}");
        let path = dir.path().join("c.json");
        fs::write(&path, text).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.outputs.spline.unwrap(), dir.path().join("out/s.json"));
    }
}
