//! Independent oracles and random problem generators shared by the
//! integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use perfspline::extremal::Node;
use perfspline::kernels::WeightFunction;
use perfspline::spectral::PeriodicFunction;
use perfspline::spline::PerfectSpline;
use rand::{Rng, SeedableRng};

/// Piecewise-polynomial form of a perfect spline obtained by integrating
/// the step function `s^(r)` r times, fixing each constant by periodicity
/// and the mean. Shares no code with the Bernoulli closed form.
pub struct PiecewiseOracle {
    start: f64,
    breaks: Vec<f64>,
    /// `levels[d][i]`: coefficients of `s^(d)` on piece `i` in powers of
    /// `x − breaks[i]`.
    levels: Vec<Vec<Vec<f64>>>,
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * u + v)
}

fn antiderivative(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(c.iter().enumerate().map(|(k, v)| v / (k + 1) as f64));
    out
}

impl PiecewiseOracle {
    pub fn new(s: &PerfectSpline) -> Self {
        let r = s.order() as usize;
        if s.is_constant() {
            let mut levels = vec![vec![vec![0.0]]; r + 1];
            levels[0] = vec![vec![s.offset()]];
            return Self {
                start: 0.0,
                breaks: vec![0.0, TAU],
                levels,
            };
        }
        let knots = s.knots();
        let mut breaks = knots.to_vec();
        breaks.push(knots[0] + TAU);
        let n = knots.len();
        let lens: Vec<f64> = (0..n).map(|i| breaks[i + 1] - breaks[i]).collect();

        let mut levels = vec![Vec::new(); r + 1];
        levels[r] = (0..n)
            .map(|i| vec![s.amplitude() * s.lead_sign() * if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
        for d in (0..r).rev() {
            let mut polys = Vec::with_capacity(n);
            let mut carry = 0.0;
            for i in 0..n {
                let mut p = antiderivative(&levels[d + 1][i]);
                p[0] = carry;
                carry = horner(&p, lens[i]);
                polys.push(p);
            }
            let integral: f64 = polys
                .iter()
                .zip(&lens)
                .map(|(p, &l)| horner(&antiderivative(p), l))
                .sum();
            let target = if d == 0 { s.offset() } else { 0.0 };
            let shift = target - integral / TAU;
            for p in &mut polys {
                p[0] += shift;
            }
            levels[d] = polys;
        }
        Self {
            start: knots[0],
            breaks,
            levels,
        }
    }

    pub fn derivative(&self, x: f64, d: usize) -> f64 {
        let mut y = (x - self.start).rem_euclid(TAU) + self.start;
        if y >= self.breaks[self.breaks.len() - 1] {
            y -= TAU;
        }
        let i = self.breaks.partition_point(|&b| b <= y).saturating_sub(1).min(self.breaks.len() - 2);
        horner(&self.levels[d][i], y - self.breaks[i])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Jump of `s^(d)` across the period boundary of the unwrapped pieces.
    pub fn periodicity_defect(&self, d: usize) -> f64 {
        let last = self.levels[d].len() - 1;
        let len = self.breaks[last + 1] - self.breaks[last];
        (horner(&self.levels[d][last], len) - self.levels[d][0][0]).abs()
    }
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Composite 5-point Gauss–Legendre on `[a, b]` split at `cuts`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cuts: &[f64], panels: usize) -> f64 {
    let mut pts = vec![a];
    pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    for w in pts.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let lo = w[0] + p as f64 * h;
            let mid = lo + 0.5 * h;
            sum += GL5.iter().map(|(u, wt)| wt * f(mid + 0.5 * h * u)).sum::<f64>() * 0.5 * h;
        }
    }
    sum
}

/// `∫ φ(x − x_k) s(x) dx` by quadrature on the piecewise oracle.
pub fn weighted_mean_oracle(oracle: &PiecewiseOracle, knots: &[f64], w: &WeightFunction, xk: f64) -> f64 {
    let e = w.half_width();
    let Some(_) = w.density(0.0) else {
        return oracle.eval(xk);
    };
    let mut cuts = vec![xk];
    for &t in knots {
        for shift in [-TAU, 0.0, TAU] {
            cuts.push(t + shift);
        }
    }
    integrate(
        |x| w.density(x - xk).unwrap_or(0.0) * oracle.eval(x),
        xk - e,
        xk + e,
        &cuts,
        4,
    )
}

pub type TestRng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// Terms `(j, a_j, b_j)` of `Σ a_j cos jx + b_j sin jx`, coefficients in [−1, 1].
pub type Terms = Vec<(usize, f64, f64)>;

pub fn random_terms(rng: &mut TestRng, degree: usize) -> Terms {
    (0..=degree)
        .map(|j| {
            let a = rng.gen_range(-1.0..1.0);
            let b = if j == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
            (j, a, b)
        })
        .collect()
}

pub fn random_harmonic(rng: &mut TestRng, degree: usize) -> PeriodicFunction {
    PeriodicFunction::from_harmonics(&random_terms(rng, degree))
}

/// `d`-th derivative of a trigonometric polynomial, summed term by term.
pub fn eval_terms(terms: &[(usize, f64, f64)], x: f64, d: u32) -> f64 {
    terms
        .iter()
        .map(|&(j, a, b)| {
            let jf = j as f64;
            if j == 0 {
                return if d == 0 { a } else { 0.0 };
            }
            // Derivatives cycle through cos, −sin, −cos, sin.
            let (c, s) = ((jf * x).cos(), (jf * x).sin());
            let scale = jf.powi(d as i32);
            let v = match d % 4 {
                0 => a * c + b * s,
                1 => -a * s + b * c,
                2 => -a * c - b * s,
                _ => a * s - b * c,
            };
            scale * v
        })
        .sum()
}

/// `max |p^(d)|` from 2^16 samples and golden-section polishing of the
/// best few, which only ever underestimates the true norm.
pub fn terms_sup_norm(terms: &[(usize, f64, f64)], d: u32) -> f64 {
    let n = 1 << 16;
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| eval_terms(terms, i as f64 * h, d).abs()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut best = vals[order[0]];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for &i in order.iter().take(16) {
        let (mut lo, mut hi) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        let f = |x: f64| eval_terms(terms, x, d).abs();
        for _ in 0..60 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if f(a) > f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        best = best.max(f(0.5 * (lo + hi)));
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weights {
    /// Box, triangle or delta at random, half-widths in [0.02, 0.25).
    Mixed,
    Delta,
}

/// One node per sector of `[0, 2π)`, placed in the middle 40% of its
/// sector, so supports never overlap.
pub fn random_layout(rng: &mut TestRng, m: usize, weights: Weights) -> Vec<Node> {
    let k = 2 * m + 1;
    let sector = TAU / k as f64;
    (0..k)
        .map(|i| {
            let x = sector * (i as f64 + rng.gen_range(0.3..0.7));
            let w = match weights {
                Weights::Delta => WeightFunction::delta(),
                Weights::Mixed => {
                    let e = rng.gen_range(0.02..0.25);
                    match rng.gen_range(0..3) {
                        0 => WeightFunction::boxcar(e).unwrap(),
                        1 => WeightFunction::triangle(e).unwrap(),
                        _ => WeightFunction::delta(),
                    }
                }
            };
            Node::new(x, w)
        })
        .collect()
}

/// Perfect spline with exactly `2m` knots: positive and negative interval
/// lengths are each drawn at random and scaled to total `π`.
pub fn random_perfect_spline(rng: &mut TestRng, r: u32, m: usize) -> PerfectSpline {
    let mut draw = || {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.3..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v * PI / total).collect::<Vec<f64>>()
    };
    let pos = draw();
    let neg = draw();
    let mut t = rng.gen_range(0.0..TAU);
    let mut knots = Vec::with_capacity(2 * m);
    for i in 0..m {
        knots.push(t);
        t += pos[i];
        knots.push(t);
        t += neg[i];
    }
    let xi = rng.gen_range(0.5..2.0);
    let offset = rng.gen_range(-1.0..1.0);
    PerfectSpline::new(r, knots, 1.0, xi, offset).unwrap()
}

/// Nodes `{π/2, π, 3π/2}` with box weights of half-width 0.1.
pub fn canonical_nodes() -> Vec<Node> {
    [PI / 2.0, PI, 1.5 * PI]
        .into_iter()
        .map(|x| Node::new(x, WeightFunction::boxcar(0.1).unwrap()))
        .collect()
}

pub fn sine() -> PeriodicFunction {
    PeriodicFunction::from_harmonics(&[(1, 0.0, 1.0)])
}

/// One case of the random extremal battery.
pub struct BatteryCase {
    pub r: u32,
    pub m: usize,
    pub nodes: Vec<Node>,
    pub terms: Terms,
    pub f: PeriodicFunction,
}

/// Case `i` of the battery: harmonic `f` of degree 1..=5 with coefficients
/// in [−1, 1], mixed weights, `r ∈ {1, 2, 3}`, `m ∈ {1, 2}`.
pub fn battery_case(i: u64) -> BatteryCase {
    let mut g = rng(0xba77e4 + i);
    let r = g.gen_range(1..=3);
    let m = g.gen_range(1..=2);
    let degree = g.gen_range(1..=5);
    let terms = random_terms(&mut g, degree);
    let nodes = random_layout(&mut g, m, Weights::Mixed);
    let f = PeriodicFunction::from_harmonics(&terms);
    BatteryCase { r, m, nodes, terms, f }
}

/// Exhaustive scan of the three-node L1 problem.
///
/// The feasible set is `c_k = p_k + t n_k` with `p = (1, 0, −1)/(C_1 − C_3)`
/// and `n ∝ (C_2 − C_3, C_3 − C_1, C_1 − C_2)` scaled so that `n ≈ (1, −2, 1)`
/// for a symmetric layout; `(c, t)` runs over a `steps × steps` grid on
/// `[−2, 2]²`.
pub struct BruteForce {
    pub base: [f64; 3],
    pub null: [f64; 3],
    pub best: f64,
    /// Objective change allowed by the scan resolution.
    pub resolution: f64,
}

pub fn brute_force_l1(targets: &[f64], samples: &[Vec<f64>], weight: f64, steps: usize) -> BruteForce {
    let (c1, c2, c3) = (targets[0], targets[1], targets[2]);
    let base = [1.0 / (c1 - c3), 0.0, -1.0 / (c1 - c3)];
    let scale = 0.5 * (c1 - c3);
    let null = [(c2 - c3) / scale, (c3 - c1) / scale, (c1 - c2) / scale];
    let n = samples[0].len();
    let u: Vec<f64> = (0..n).map(|i| (0..3).map(|k| base[k] * samples[k][i]).sum()).collect();
    let v: Vec<f64> = (0..n).map(|i| (0..3).map(|k| null[k] * samples[k][i]).sum()).collect();

    let h = 4.0 / (steps - 1) as f64;
    let mut best = f64::INFINITY;
    for a in 0..steps {
        let c = -2.0 + a as f64 * h;
        for b in 0..steps {
            let t = -2.0 + b as f64 * h;
            let obj: f64 = u.iter().zip(&v).map(|(ui, vi)| (c + ui + t * vi).abs()).sum::<f64>() * weight;
            best = best.min(obj);
        }
    }
    let lipschitz = TAU + weight * v.iter().map(|x| x.abs()).sum::<f64>();
    BruteForce {
        base,
        null,
        best,
        resolution: 0.5 * h * lipschitz,
    }
}
