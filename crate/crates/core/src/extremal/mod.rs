//! The constrained L1 extremal problem over smoothed Bernoulli translates
//! and the extraction of a candidate perfect spline from its optimum.
//!
//! With `ψ_k(x) = 2π (A_ε ∗ B_r ∗ φ_k)(x − x_k)` the discretized problem is
//!
//! ```text
//! minimize  (2π/N) Σ_i |c + Σ_k c_k ψ_k(x_i)|
//! subject to Σ_k c_k C_k = 1,  Σ_k c_k = 0.
//! ```
//!
//! The optimal integrand `g` changes sign at most `2m` times; its sign
//! pattern gives the knots, and the Lagrange multipliers of the problem
//! give amplitude and offset of the spline.

mod simplex;
pub mod seeds;

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use simplex::{BoundedLp, LpSolution};

use crate::error::{Error, Result};
use crate::kernels::{SmoothingKernel, WeightFunction};
use crate::spectral::{sign_change_brackets, PeriodicFunction, SpectralGrid};
use crate::spline::{mean_zero_residual, PerfectSpline};

/// Largest supported spline order.
pub const MAX_ORDER: u32 = 12;

/// A node `x_k` with its weight `φ_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub x: f64,
    pub weight: WeightFunction,
}

impl Node {
    pub fn new(x: f64, weight: WeightFunction) -> Self {
        Self { x, weight }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// Smoothing parameter `ε` of `A_ε`.
    pub smoothing: f64,
    /// Quadrature grid size `N`.
    pub grid: usize,
    /// Truncation bandwidth `J` of the basis.
    pub bandwidth: usize,
    /// Relative tolerance below which samples of `g` count as zero.
    pub zero_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            smoothing: 1e-3,
            grid: 2048,
            bandwidth: 4096,
            zero_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeanInterpolationProblem {
    order: u32,
    m: usize,
    nodes: Vec<Node>,
    targets: Vec<f64>,
    smoothing: SmoothingKernel,
    grid: SpectralGrid,
    bandwidth: usize,
    zero_tol: f64,
}

impl MeanInterpolationProblem {
    pub fn new(order: u32, m: usize, nodes: Vec<Node>, targets: Vec<f64>, settings: SolverSettings) -> Result<Self> {
        validate_layout(order, m, &nodes)?;
        if targets.len() != nodes.len() || targets.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "expected {} finite targets, got {}",
                nodes.len(),
                targets.len()
            )));
        }
        if settings.bandwidth < 1 {
            return Err(Error::InvalidProblem("bandwidth must be >= 1".into()));
        }
        if !(settings.zero_tol >= 0.0 && settings.zero_tol < 1.0) {
            return Err(Error::InvalidProblem("zero tolerance must lie in [0, 1)".into()));
        }
        Ok(Self {
            order,
            m,
            nodes,
            targets,
            smoothing: SmoothingKernel::new(settings.smoothing)?,
            grid: SpectralGrid::new(settings.grid)?,
            bandwidth: settings.bandwidth,
            zero_tol: settings.zero_tol,
        })
    }

    /// Builds the problem with targets `C_k` taken from `f`.
    pub fn for_function(
        order: u32,
        m: usize,
        nodes: Vec<Node>,
        f: &PeriodicFunction,
        settings: SolverSettings,
    ) -> Result<Self> {
        let targets = compute_targets(f, &nodes);
        Self::new(order, m, nodes, targets, settings)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn smoothing(&self) -> SmoothingKernel {
        self.smoothing
    }

    pub fn grid(&self) -> SpectralGrid {
        self.grid
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn with_smoothing(&self, eps: f64) -> Result<Self> {
        Ok(Self {
            smoothing: SmoothingKernel::new(eps)?,
            ..self.clone()
        })
    }

    /// `Some(C)` when every target equals `C` within `1e-12`.
    pub fn common_target(&self) -> Option<f64> {
        let first = self.targets[0];
        let scale = 1.0 + first.abs();
        self.targets
            .iter()
            .all(|c| (c - first).abs() <= 1e-12 * scale)
            .then_some(first)
    }
}

/// Checks node count, ordering and support disjointness within `[0, 2π)`.
pub fn validate_layout(order: u32, m: usize, nodes: &[Node]) -> Result<()> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidProblem(format!("order must lie in 1..={MAX_ORDER}, got {order}")));
    }
    if m == 0 {
        return Err(Error::InvalidProblem("m must be >= 1".into()));
    }
    if nodes.len() != 2 * m + 1 {
        return Err(Error::InvalidProblem(format!(
            "expected {} nodes for m = {m}, got {}",
            2 * m + 1,
            nodes.len()
        )));
    }
    for (k, node) in nodes.iter().enumerate() {
        let e = node.weight.half_width();
        if !node.x.is_finite() || node.x - e < 0.0 || node.x + e >= TAU {
            return Err(Error::InvalidProblem(format!(
                "support of node {k} at {} (half-width {e}) leaves [0, 2π)",
                node.x
            )));
        }
    }
    for (k, pair) in nodes.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a.x >= b.x {
            return Err(Error::InvalidProblem(format!("nodes {k} and {} are not increasing", k + 1)));
        }
        if a.x + a.weight.half_width() >= b.x - b.weight.half_width() {
            return Err(Error::InvalidProblem(format!(
                "supports of nodes {k} and {} overlap",
                k + 1
            )));
        }
    }
    Ok(())
}

/// `C_k = ∫ φ_k(x − x_k) f(x) dx`, exact for band-limited `f`.
pub fn compute_targets(f: &PeriodicFunction, nodes: &[Node]) -> Vec<f64> {
    nodes
        .iter()
        .map(|node| {
            f.apply_transfer(|j| Complex64::new(node.weight.transfer(j), 0.0))
                .evaluate(node.x)
        })
        .collect()
}

/// The translates `ψ_k` with their grid samples.
#[derive(Clone, Debug)]
pub struct Basis {
    pub functions: Vec<PeriodicFunction>,
    pub samples: Vec<Vec<f64>>,
}

/// `ψ̂_k(j) = sech(εj) (ij)^{−r} ŵ_k(j) e^{−ijx_k}` for `0 < |j| ≤ J`.
pub fn assemble_basis(p: &MeanInterpolationProblem) -> Basis {
    let r = p.order as i32;
    let functions: Vec<PeriodicFunction> = p
        .nodes
        .iter()
        .map(|node| {
            PeriodicFunction::from_fn(p.bandwidth, |j| {
                if j == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let jf = j as f64;
                Complex64::new(0.0, jf).powi(-r)
                    * (p.smoothing.transfer(j) * node.weight.transfer(j))
                    * Complex64::from_polar(1.0, -jf * node.x)
            })
        })
        .collect();
    let samples = functions.iter().map(|f| f.samples(&p.grid)).collect();
    Basis { functions, samples }
}

#[derive(Clone, Debug)]
pub struct L1Solution {
    /// Constant term `c`.
    pub constant: f64,
    /// `c_1 ..= c_{2m+1}`.
    pub coeffs: Vec<f64>,
    /// Optimal integrand `c + Σ c_k ψ_k`.
    pub g: PeriodicFunction,
    /// `g` on the quadrature grid.
    pub g_samples: Vec<f64>,
    /// Discretized objective at the optimum.
    pub objective: f64,
    pub lp_iterations: usize,
}

/// `(2π/N) Σ_i |c + Σ_k c_k ψ_k(x_i)|`.
pub fn discrete_objective(basis: &Basis, grid: &SpectralGrid, constant: f64, coeffs: &[f64]) -> f64 {
    integrand_samples(basis, constant, coeffs)
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        * grid.weight()
}

fn integrand_samples(basis: &Basis, constant: f64, coeffs: &[f64]) -> Vec<f64> {
    let n = basis.samples[0].len();
    (0..n)
        .map(|i| {
            constant
                + coeffs
                    .iter()
                    .zip(&basis.samples)
                    .map(|(c, s)| c * s[i])
                    .sum::<f64>()
        })
        .collect()
}

/// Solves the discretized problem exactly.
///
/// The split form `min Σ w u_i, u_i ≥ ±g_i` is handled through its LP dual
///
/// ```text
/// maximize ν_1  subject to  Σ_i w s_i a_i = Eᵀν,  −1 ≤ s_i ≤ 1
/// ```
///
/// (`a_i = (1, ψ_1(x_i), …)`, `E` the two constraint rows), which has only
/// `2m + 2` rows. The simplex multipliers of that dual are the primal
/// coefficients `(c, c_1, …)`.
pub fn solve_l1(p: &MeanInterpolationProblem, basis: &Basis) -> Result<L1Solution> {
    let sol = solve_l1_unchecked(p, basis)?;
    check_sign_changes(&sol, p)?;
    Ok(sol)
}

/// [`solve_l1`] without the sign-change check on `g`.
pub fn solve_l1_unchecked(p: &MeanInterpolationProblem, basis: &Basis) -> Result<L1Solution> {
    if let Some(value) = p.common_target() {
        return Err(Error::InfeasibleTargets { value });
    }
    let k = p.nodes.len();
    let rows = k + 1;
    let n = p.grid.len();
    let w = p.grid.weight();

    let mut lp = BoundedLp::new(vec![0.0; rows]);
    for i in 0..n {
        let mut col = Vec::with_capacity(rows);
        col.push(w);
        col.extend(basis.samples.iter().map(|s| w * s[i]));
        lp.add_column(col, 0.0, -1.0, 1.0);
    }
    let mut targets_col = vec![0.0];
    targets_col.extend(p.targets.iter().map(|c| -c));
    lp.add_column(targets_col, -1.0, f64::NEG_INFINITY, f64::INFINITY);
    let mut ones_col = vec![0.0];
    ones_col.extend(std::iter::repeat_n(-1.0, k));
    lp.add_column(ones_col, 0.0, f64::NEG_INFINITY, f64::INFINITY);

    let sol = lp.solve(50 * (n + rows))?;
    let constant = sol.multipliers[0];
    let coeffs = sol.multipliers[1..].to_vec();

    let mut g = PeriodicFunction::constant(constant);
    for (c, psi) in coeffs.iter().zip(&basis.functions) {
        g = g.add_scaled(psi, *c);
    }
    let g_samples = integrand_samples(basis, constant, &coeffs);
    let objective = g_samples.iter().map(|v| v.abs()).sum::<f64>() * w;
    Ok(L1Solution {
        constant,
        coeffs,
        g,
        g_samples,
        objective,
        lp_iterations: sol.iterations,
    })
}

/// `ν(g) ≤ 2m`, counted on the arcs where `g` does not vanish.
pub fn check_sign_changes(sol: &L1Solution, p: &MeanInterpolationProblem) -> Result<()> {
    let mask = seeds::arc_mask(&sol.g_samples);
    let masked: Vec<f64> = sol
        .g_samples
        .iter()
        .zip(&mask)
        .map(|(v, &z)| if z { 0.0 } else { *v })
        .collect();
    let found = crate::spectral::count_sign_changes(&masked, p.zero_tol)?;
    if found > 2 * p.m {
        return Err(Error::TooManySignChanges {
            found,
            allowed: 2 * p.m,
        });
    }
    Ok(())
}

/// Multipliers `(η, λ, μ)` on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LagrangeCertificate {
    pub eta: f64,
    pub lambda: f64,
    pub mu: f64,
}

/// Certificate plus the quantities it was recovered from.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub certificate: LagrangeCertificate,
    /// `I_k = ∫ sgn g(x) (A_ε ∗ B_r ∗ φ_k)(x − x_k) dx` on the grid.
    pub integrals: Vec<f64>,
    /// Max residual of `I_k + λ'C_k + μ' = 0` and of the `c`-stationarity row.
    pub residual: f64,
    /// Grid mean of the sign function.
    pub sign_mean: f64,
    /// Subgradient values assigned to the samples where `g` vanishes.
    pub zero_samples: Vec<(usize, f64)>,
}

/// Recovers the multipliers from the primal optimum alone.
///
/// Samples where `g` vanishes (to the zero tolerance) carry an unknown
/// subgradient value in `[−1, 1]`; those values and `(λ', μ')` are fitted by
/// least squares to the stationarity system with `η' = 1`
///
/// ```text
/// (2π/N) Σ_i sgn g(x_i)                      = 0
/// (2π/N) Σ_i sgn g(x_i) ψ_k(x_i)/2π + λ'C_k + μ' = 0,   k = 1..2m+1
/// ```
///
/// and the result is normalized to the unit sphere.
pub fn recover_certificate(sol: &L1Solution, p: &MeanInterpolationProblem, basis: &Basis) -> Result<CertificateReport> {
    let k = p.nodes.len();
    let w = p.grid.weight();
    let gmax = sol.g_samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if gmax == 0.0 {
        return Err(Error::AllZero);
    }
    let cutoff = p.zero_tol * gmax;
    let zeros: Vec<usize> = (0..sol.g_samples.len())
        .filter(|&i| sol.g_samples[i].abs() < cutoff)
        .collect();
    let sgn = |i: usize| if sol.g_samples[i].abs() < cutoff { 0.0 } else { sol.g_samples[i].signum() };

    // Fixed parts of the rows.
    let mut fixed = vec![0.0; k + 1];
    for i in 0..sol.g_samples.len() {
        let s = sgn(i);
        if s == 0.0 {
            continue;
        }
        fixed[0] += w * s;
        for (row, psi) in fixed[1..].iter_mut().zip(&basis.samples) {
            *row += w * s * psi[i] / TAU;
        }
    }
    // Unknowns: λ', μ', then one subgradient value per zero sample.
    let cols = 2 + zeros.len();
    let mut mat = DMatrix::<f64>::zeros(k + 1, cols);
    for (z, &i) in zeros.iter().enumerate() {
        mat[(0, 2 + z)] = w;
        for (row, psi) in basis.samples.iter().enumerate() {
            mat[(row + 1, 2 + z)] = w * psi[i] / TAU;
        }
    }
    for row in 0..k {
        mat[(row + 1, 0)] = p.targets[row];
        mat[(row + 1, 1)] = 1.0;
    }
    let rhs = -DVector::from_vec(fixed.clone());
    let svd = mat.clone().svd(true, true);
    let u = svd
        .solve(&rhs, 1e-13 * svd.singular_values.max())
        .map_err(|e| Error::InvalidProblem(format!("certificate least squares failed: {e}")))?;
    let resid = &mat * &u - &rhs;
    let residual = resid.amax();

    let subgrad: Vec<(usize, f64)> = zeros.iter().enumerate().map(|(z, &i)| (i, u[2 + z])).collect();
    let mut integrals = fixed[1..].to_vec();
    for &(i, s) in &subgrad {
        for (row, psi) in integrals.iter_mut().zip(&basis.samples) {
            *row += w * s * psi[i] / TAU;
        }
    }
    let sign_mean = (fixed[0] + subgrad.iter().map(|(_, s)| w * s).sum::<f64>()) / TAU;

    let scale = integrals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let limit = 1e-6 * scale;
    let worst_subgrad = subgrad.iter().map(|(_, s)| s.abs()).fold(0.0, f64::max);
    if residual > limit || worst_subgrad > 1.0 + 1e-6 {
        return Err(Error::StationarityResidual {
            residual: residual.max(worst_subgrad - 1.0),
            limit,
        });
    }

    let (lambda, mu) = (u[0], u[1]);
    let norm = (1.0 + lambda * lambda + mu * mu).sqrt();
    let certificate = LagrangeCertificate {
        eta: 1.0 / norm,
        lambda: lambda / norm,
        mu: mu / norm,
    };
    if certificate.lambda.abs() < 1e-8 {
        return Err(Error::NullMultiplier {
            lambda: certificate.lambda,
        });
    }
    Ok(CertificateReport {
        certificate,
        integrals,
        residual,
        sign_mean,
        zero_samples: subgrad,
    })
}

/// Sign changes of `g`, each localized by safeguarded false position on the
/// bracketing grid cell. At most `max_knots` are accepted.
pub fn extract_knots(g: &PeriodicFunction, grid: &SpectralGrid, zero_tol: f64, max_knots: usize) -> Result<Vec<f64>> {
    let samples = g.samples(grid);
    let brackets = sign_change_brackets(&samples, zero_tol)?;
    if brackets.len() > max_knots {
        return Err(Error::TooManySignChanges {
            found: brackets.len(),
            allowed: max_knots,
        });
    }
    let gmax = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = 1e-13 * gmax;
    let mut knots: Vec<f64> = brackets
        .iter()
        .map(|&(a, b)| {
            let lo = grid.point(a);
            let mut hi = grid.point(b);
            if hi <= lo {
                hi += TAU;
            }
            crate::spectral::wrap_angle(find_root(|x| g.evaluate(x), lo, hi, samples[a], samples[b], tol))
        })
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    Ok(knots)
}

/// Illinois false position with bisection fallback on a sign-changing
/// bracket.
pub fn find_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, ftol: f64) -> f64 {
    let mut side = 0i8;
    for iter in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) || iter % 8 == 7 {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() <= ftol {
            return x;
        }
        if (fx > 0.0) == (fb > 0.0) {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Largest raw signed-length sum accepted from grid-localized knots before
/// they are rebalanced; discretization can shift each knot by about one cell.
fn candidate_mean_zero_limit(knot_count: usize, grid: &SpectralGrid) -> f64 {
    (knot_count as f64 * grid.weight()).max(1e-6)
}

/// Assembles `s = −((−1)^r η h + μ)/λ` with `h = sgn g ∗ B_r`.
///
/// Knots from the grid solve carry a discretization error in their signed
/// length sum; they are shifted alternately by a common amount to restore
/// it exactly, which fails with [`Error::MeanZeroViolation`] if the raw sum
/// is larger than the discretization can explain.
pub fn build_candidate(
    knots: &[f64],
    cert: &LagrangeCertificate,
    g: &PeriodicFunction,
    p: &MeanInterpolationProblem,
) -> Result<PerfectSpline> {
    if knots.is_empty() || !knots.len().is_multiple_of(2) {
        return Err(Error::MeanZeroViolation {
            residual: TAU,
            limit: 0.0,
        });
    }
    let raw = mean_zero_residual(knots);
    let limit = candidate_mean_zero_limit(knots.len(), &p.grid);
    if raw.abs() > limit {
        return Err(Error::MeanZeroViolation { residual: raw, limit });
    }
    let shift = raw / (2.0 * knots.len() as f64);
    let balanced: Vec<f64> = knots
        .iter()
        .enumerate()
        .map(|(i, &t)| if i % 2 == 0 { t + shift } else { t - shift })
        .collect();
    let res = mean_zero_residual(&balanced);
    if res.abs() > 1e-6 {
        return Err(Error::MeanZeroViolation { residual: res, limit: 1e-6 });
    }
    let mid = 0.5 * (knots[0] + knots[1]);
    let lead_sign = if g.evaluate(mid) >= 0.0 { 1.0 } else { -1.0 };
    let (amplitude, offset) = candidate_scales(p.order, cert);
    PerfectSpline::new(p.order, balanced, lead_sign, amplitude, offset)
}

/// `(ξ, a) = (−(−1)^r η/λ, −μ/λ)`.
pub fn candidate_scales(order: u32, cert: &LagrangeCertificate) -> (f64, f64) {
    let parity = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    (-parity * cert.eta / cert.lambda, -cert.mu / cert.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn symmetric_problem(f: &PeriodicFunction) -> MeanInterpolationProblem {
        let w = WeightFunction::boxcar(0.1).unwrap();
        let nodes = [PI / 2.0, PI, 1.5 * PI].iter().map(|&x| Node::new(x, w)).collect();
        MeanInterpolationProblem::for_function(2, 1, nodes, f, SolverSettings::default()).unwrap()
    }

    #[test]
    fn targets_examples() {
        let w = WeightFunction::boxcar(0.3).unwrap();
        let nodes = vec![Node::new(1.0, w), Node::new(2.0, WeightFunction::delta())];
        let c = compute_targets(&PeriodicFunction::constant(3.7), &nodes);
        assert!(c.iter().all(|v| (v - 3.7).abs() < 1e-15));
        let sin = PeriodicFunction::from_harmonics(&[(1, 0.0, 1.0)]);
        let d = compute_targets(&sin, &[Node::new(PI / 2.0, WeightFunction::delta())]);
        assert!((d[0] - 1.0).abs() < 1e-15);
        let b = compute_targets(&sin, &nodes);
        let exact = ((1.0f64 - 0.3).cos() - (1.0f64 + 0.3).cos()) / 0.6;
        assert!((b[0] - exact).abs() < 1e-15);
        assert!((b[0] - 1.0f64.sin() * 0.3f64.sin() / 0.3).abs() < 1e-15);
    }

    #[test]
    fn layout_validation() {
        let w = WeightFunction::boxcar(0.5).unwrap();
        let overlapping = vec![Node::new(1.0, w), Node::new(1.8, w), Node::new(4.0, w)];
        assert!(validate_layout(2, 1, &overlapping).is_err());
        let outside = vec![Node::new(0.2, w), Node::new(2.0, w), Node::new(4.0, w)];
        assert!(validate_layout(2, 1, &outside).is_err());
        let wrong_count = vec![Node::new(1.0, w), Node::new(3.0, w)];
        assert!(validate_layout(2, 1, &wrong_count).is_err());
        let d = WeightFunction::delta();
        let deltas = vec![Node::new(0.0, d), Node::new(1.0, d), Node::new(6.0, d)];
        assert!(validate_layout(2, 1, &deltas).is_ok());
        let dup = vec![Node::new(0.0, d), Node::new(1.0, d), Node::new(1.0, d)];
        assert!(validate_layout(2, 1, &dup).is_err());
    }

    #[test]
    fn basis_examples() {
        let f = PeriodicFunction::from_harmonics(&[(1, 0.0, 1.0)]);
        let p = symmetric_problem(&f);
        let basis = assemble_basis(&p);
        for psi in &basis.functions {
            assert_eq!(psi.mean(), 0.0);
        }
        // box π/2, ε = 1, r = 2, j = 1
        let w = WeightFunction::boxcar(PI / 2.0).unwrap();
        let nodes = vec![Node::new(1.7, w), Node::new(3.5 + 0.1, WeightFunction::delta()), Node::new(5.0, WeightFunction::delta())];
        let settings = SolverSettings { smoothing: 1.0, bandwidth: 8, grid: 64, ..Default::default() };
        let p = MeanInterpolationProblem::new(2, 1, nodes, vec![0.0, 1.0, 2.0], settings).unwrap();
        let b = assemble_basis(&p);
        let expected = -(1.0 / 1f64.cosh()) * (2.0 / PI) * Complex64::from_polar(1.0, -1.7);
        assert!((b.functions[0].coeff(1) - expected).norm() < 1e-15);
        // delta, ε = 0 → 2π·B_r(· − x_k)
        let p0 = p.with_smoothing(0.0).unwrap();
        let b0 = assemble_basis(&p0);
        let kernel = crate::kernels::BernoulliKernel::new(2, 8).unwrap();
        for j in 1..=8 {
            let e = kernel.transfer(j) * Complex64::from_polar(1.0, -(j as f64) * 5.0);
            assert!((b0.functions[2].coeff(j) - e).norm() < 1e-15);
        }
    }

    #[test]
    fn equal_targets_are_infeasible() {
        let p = symmetric_problem(&PeriodicFunction::constant(2.0));
        let basis = assemble_basis(&p);
        assert!(matches!(solve_l1(&p, &basis), Err(Error::InfeasibleTargets { .. })));
    }

    #[test]
    fn l1_solution_is_feasible_and_stationary() {
        let f = PeriodicFunction::from_harmonics(&[(1, 0.0, 1.0)]);
        let p = symmetric_problem(&f);
        let basis = assemble_basis(&p);
        let sol = solve_l1(&p, &basis).unwrap();
        let cc: f64 = sol.coeffs.iter().zip(p.targets()).map(|(a, b)| a * b).sum();
        let cs: f64 = sol.coeffs.iter().sum();
        assert!((cc - 1.0).abs() < 1e-10);
        assert!(cs.abs() < 1e-10);
        assert!(sol.objective > 0.0);
        let obj = discrete_objective(&basis, &p.grid(), sol.constant, &sol.coeffs);
        assert!((obj - sol.objective).abs() < 1e-14);

        let rep = recover_certificate(&sol, &p, &basis).unwrap();
        let c = rep.certificate;
        assert!((c.eta * c.eta + c.lambda * c.lambda + c.mu * c.mu - 1.0).abs() < 1e-14);
        assert!(rep.sign_mean.abs() < 1e-6);
        assert!(rep.residual < 1e-8);
    }

    #[test]
    fn knot_extraction_examples() {
        let grid = SpectralGrid::new(64).unwrap();
        let s2 = PeriodicFunction::from_harmonics(&[(2, 0.0, 1.0)]);
        let k = extract_knots(&s2, &grid, 1e-9, 4).unwrap();
        let expected = [0.0, PI / 2.0, PI, 1.5 * PI];
        assert_eq!(k.len(), 4);
        for (a, b) in k.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let c2 = PeriodicFunction::from_harmonics(&[(0, 2.0, 0.0), (1, 1.0, 0.0)]);
        assert!(extract_knots(&c2, &grid, 1e-9, 4).unwrap().is_empty());
        let sh = PeriodicFunction::from_harmonics(&[(0, 0.5, 0.0), (1, 0.0, 1.0)]);
        let k = extract_knots(&sh, &grid, 1e-9, 2).unwrap();
        assert!((k[0] - 7.0 * PI / 6.0).abs() < 1e-10);
        assert!((k[1] - 11.0 * PI / 6.0).abs() < 1e-10);
        assert!(matches!(
            extract_knots(&s2, &grid, 1e-9, 2),
            Err(Error::TooManySignChanges { found: 4, allowed: 2 })
        ));
    }

    #[test]
    fn candidate_scale_examples() {
        let h = 0.5f64.sqrt();
        let c = LagrangeCertificate { eta: h, lambda: h, mu: 0.0 };
        let (xi, a) = candidate_scales(2, &c);
        assert!((xi + 1.0).abs() < 1e-15 && a == 0.0);
        let c = LagrangeCertificate { eta: 0.5, lambda: 0.5, mu: 0.0 };
        assert_eq!(candidate_scales(1, &c), (1.0, 0.0));
        let c = LagrangeCertificate { eta: 0.3, lambda: 2.0, mu: 1.0 };
        assert_eq!(candidate_scales(3, &c).1, -0.5);
    }
}
