//! Verification of a spline against a problem and its source function.

use serde::{Deserialize, Serialize};

use crate::extremal::MeanInterpolationProblem;
use crate::spectral::{count_sign_changes, PeriodicFunction, SpectralGrid};
use crate::spline::PerfectSpline;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `|∫φ_k s − C_k|`.
    pub interpolation: f64,
    /// Largest accepted signed interval length sum.
    pub mean_zero: f64,
    /// Accepted excess of `|ξ|` over `‖f^(r)‖∞`, relative to the latter.
    pub extremal: f64,
    /// Stopping tolerance of the Gauss–Newton polish.
    pub refine: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            interpolation: 1e-8,
            mean_zero: 1e-10,
            extremal: 1e-6,
            refine: 1e-11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeResidual {
    pub x: f64,
    pub target: f64,
    pub value: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub interpolation: bool,
    pub mean_zero: bool,
    pub extremal: bool,
    pub knot_count: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub r: u32,
    pub m: usize,
    pub nodes: Vec<NodeResidual>,
    pub max_residual: f64,
    pub xi: f64,
    pub f_r_norm: f64,
    /// `‖f^(r)‖∞ − |ξ|`.
    pub extremal_margin: f64,
    pub knot_count: usize,
    pub mean_zero_residual: f64,
    /// Sign changes of `δ = s − f` on the grid.
    pub delta_sign_changes: usize,
    /// Whether `ν(δ) ≥ 2m + 1`.
    pub delta_changes_enough: bool,
    pub checks: Checks,
    pub passed: bool,
    pub diagnosis: String,
}

/// Recomputes every check from scratch; nothing from the solve is reused.
pub fn verify(
    spline: &PerfectSpline,
    problem: &MeanInterpolationProblem,
    f: &PeriodicFunction,
    tol: &Tolerances,
) -> VerificationReport {
    let grid = problem.grid();
    let r = problem.order();
    let m = problem.m();

    let nodes: Vec<NodeResidual> = problem
        .nodes()
        .iter()
        .zip(problem.targets())
        .map(|(node, &target)| {
            let value = spline.weighted_mean(&node.weight, node.x);
            NodeResidual {
                x: node.x,
                target,
                value,
                residual: value - target,
            }
        })
        .collect();
    let max_residual = nodes.iter().map(|n| n.residual.abs()).fold(0.0, f64::max);

    let f_r_norm = f.derivative(r).sup_norm(&grid);
    let xi = spline.amplitude();
    let extremal_margin = f_r_norm - xi.abs();
    let mean_zero_residual = spline.mean_zero_residual();
    let knot_count = spline.knots().len();

    let delta_sign_changes = delta_changes(spline, f, &grid);
    let delta_changes_enough = delta_sign_changes > 2 * m;

    let checks = Checks {
        interpolation: max_residual <= tol.interpolation,
        mean_zero: mean_zero_residual.abs() <= tol.mean_zero,
        extremal: extremal_margin >= -tol.extremal * f_r_norm.max(f64::MIN_POSITIVE),
        knot_count: knot_count <= 2 * m,
    };
    let passed = checks.interpolation && checks.mean_zero && checks.extremal && checks.knot_count;
    let diagnosis = diagnose(&checks, delta_sign_changes, m);

    VerificationReport {
        r,
        m,
        nodes,
        max_residual,
        xi,
        f_r_norm,
        extremal_margin,
        knot_count,
        mean_zero_residual,
        delta_sign_changes,
        delta_changes_enough,
        checks,
        passed,
        diagnosis,
    }
}

fn delta_changes(spline: &PerfectSpline, f: &PeriodicFunction, grid: &SpectralGrid) -> usize {
    let fs = f.samples(grid);
    let delta: Vec<f64> = grid.points().zip(&fs).map(|(x, fx)| spline.eval(x) - fx).collect();
    let scale = fs.iter().map(|v| v.abs()).fold(1.0, f64::max);
    count_sign_changes(&delta, 1e-12 * scale).unwrap_or(0)
}

fn diagnose(checks: &Checks, nu: usize, m: usize) -> String {
    let mut notes = Vec::new();
    if !checks.interpolation {
        notes.push("weighted means do not match the targets".to_string());
    }
    if !checks.mean_zero {
        notes.push("knots violate the mean-zero condition, s^(r-1) is not periodic".to_string());
    }
    if !checks.knot_count {
        notes.push(format!("more than {} knots", 2 * m));
    }
    if !checks.extremal {
        if nu > 2 * m {
            notes.push(format!(
                "|xi| exceeds ||f^(r)||: delta = s - f changes sign {nu} >= {} times, so the knot count of s bounds too few sign changes of delta^(r)",
                2 * m + 1
            ));
        } else {
            notes.push(format!(
                "|xi| exceeds ||f^(r)||: delta = s - f changes sign only {nu} < {} times, so s does not interpolate f in the mean",
                2 * m + 1
            ));
        }
    }
    if notes.is_empty() {
        "ok".to_string()
    } else {
        notes.join("; ")
    }
}
