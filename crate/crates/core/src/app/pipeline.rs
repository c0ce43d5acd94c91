//! Targets → L1 solve → certificate → knots → refine → verify.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::seeds::{arc_seeds, cell_seeds, sign_structure, Seed};
use crate::extremal::{
    assemble_basis, build_candidate, check_sign_changes, extract_knots, recover_certificate, solve_l1_unchecked,
    LagrangeCertificate,
    MeanInterpolationProblem,
};
use crate::refine::{fit_scales, gauss_newton, KnotSystem, RefineOutcome, RefineSettings};
use crate::spectral::PeriodicFunction;
use crate::spline::PerfectSpline;

use super::report::{verify, Tolerances, VerificationReport};

/// How the starting point of the polish was obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// All targets agree; the LP is skipped.
    #[default]
    Constant,
    /// Knots from the sign changes of `g`, scales from the certificate.
    Certificate,
    /// `g` vanishes on arcs; knots completed inside them.
    ZeroArcs,
    /// Best-ranked knot sets from a coarse scan.
    Scan,
}

/// What each stage produced, for diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub route: Route,
    pub lp_iterations: usize,
    pub lp_objective: f64,
    pub certificate: Option<LagrangeCertificate>,
    pub certificate_residual: Option<f64>,
    pub candidate_knots: usize,
    pub refine_iterations: usize,
    pub deleted_pairs: usize,
    /// Polish attempts before one converged.
    pub attempts: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub spline: PerfectSpline,
    pub report: VerificationReport,
    pub trace: Trace,
}

/// Points per period for the scan seeds.
const SCAN_CELLS: usize = 24;
/// Knot sets per count in the scan.
const SCAN_LIMIT: usize = 20_000;
/// Scan seeds that are polished, best first.
const SCAN_POLISH: usize = 48;

/// Builds the spline from the problem targets alone.
///
/// The certificate route is tried first. If it fails, or `g` vanishes on
/// arcs, the sign pattern of `g` is completed inside the arcs, and as a last
/// resort the best knot sets of a coarse scan are polished. Every route ends in the same
/// Gauss–Newton solve of the interpolation equations, so any result has at
/// most `2m` knots and satisfies the equations to tolerance. The error of
/// the certificate route is returned if nothing converges.
pub fn construct(p: &MeanInterpolationProblem, tol: &Tolerances) -> Result<(PerfectSpline, Trace)> {
    if let Some(c) = p.common_target() {
        return Ok((PerfectSpline::constant(p.order(), c), Trace::default()));
    }
    let settings = RefineSettings {
        tol: tol.refine,
        least_squares_tol: tol.interpolation,
        ..RefineSettings::default()
    };
    let basis = assemble_basis(p);
    let sol = solve_l1_unchecked(p, &basis)?;
    let grid = p.grid();
    let mut trace = Trace {
        lp_iterations: sol.lp_iterations,
        lp_objective: sol.objective,
        ..Trace::default()
    };
    let mut first_err = None;
    // Too many sign changes (truncation ringing of g when r = 1) leaves
    // only the scan.
    let structure = match check_sign_changes(&sol, p) {
        Ok(()) => Some(sign_structure(&sol.g, &sol.g_samples, &grid)?),
        Err(e) => {
            first_err = Some(e);
            None
        }
    };
    let cert = recover_certificate(&sol, p, &basis);
    if let Ok(c) = &cert {
        trace.certificate = Some(c.certificate);
        trace.certificate_residual = Some(c.residual);
    }

    if structure.as_ref().is_some_and(|s| !s.has_arcs()) {
        let attempt = cert.and_then(|c| {
            let knots = extract_knots(&sol.g, &grid, p.zero_tol(), 2 * p.m())?;
            let candidate = build_candidate(&knots, &c.certificate, &sol.g, p)?;
            trace.candidate_knots = knots.len();
            gauss_newton(&candidate, p, &settings)
        });
        trace.attempts += 1;
        match attempt {
            Ok(out) => return Ok(finish(out, trace, Route::Certificate)),
            Err(e) => first_err = Some(e),
        }
    }

    let arcs = structure.map(|s| arc_seeds(&s, 2 * p.m())).unwrap_or_default();
    let routes = [
        (Route::ZeroArcs, arcs),
        (Route::Scan, ranked_scan(p)),
    ];
    for (route, seeds) in routes {
        for (knots, lead) in seeds {
            trace.attempts += 1;
            let attempt = fit_scales(p, &knots, lead).and_then(|(xi, a)| {
                let start = PerfectSpline::new(p.order(), knots.clone(), lead, xi, a)?;
                gauss_newton(&start, p, &settings)
            });
            match attempt {
                Ok(out) => {
                    trace.candidate_knots = knots.len();
                    return Ok(finish(out, trace, route));
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
    }
    Err(first_err.unwrap_or(Error::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    }))
}

/// Scan seeds ordered by the residual after fitting `(ξ, a)`.
fn ranked_scan(p: &MeanInterpolationProblem) -> Vec<Seed> {
    let mut scored: Vec<(f64, Seed)> = cell_seeds(p.m(), SCAN_CELLS, SCAN_LIMIT)
        .into_iter()
        .filter_map(|(knots, lead)| {
            let (xi, a) = fit_scales(p, &knots, lead).ok()?;
            let mut theta = knots.clone();
            theta.extend([xi, a]);
            let res = KnotSystem::new(p, lead).residuals(&theta).ok()?;
            let score = res.iter().map(|v| v * v).sum::<f64>();
            score.is_finite().then_some((score, (knots, lead)))
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.into_iter().take(SCAN_POLISH).map(|(_, s)| s).collect()
}

fn finish(out: RefineOutcome, mut trace: Trace, route: Route) -> (PerfectSpline, Trace) {
    trace.route = route;
    trace.refine_iterations = out.iterations;
    trace.deleted_pairs = out.deleted_pairs;
    (out.spline, trace)
}

/// Full pipeline with default tolerances.
pub fn solve(p: &MeanInterpolationProblem, f: &PeriodicFunction) -> Result<SolveOutput> {
    solve_with(p, f, &Tolerances::default())
}

pub fn solve_with(p: &MeanInterpolationProblem, f: &PeriodicFunction, tol: &Tolerances) -> Result<SolveOutput> {
    let (spline, trace) = construct(p, tol)?;
    let report = verify(&spline, p, f, tol);
    Ok(SolveOutput { spline, report, trace })
}
