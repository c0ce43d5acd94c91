//! Band-limited 2π-periodic real functions held by their Fourier
//! coefficients.
//!
//! A [`PeriodicFunction`] stores `c_0, …, c_J` for
//! `f(x) = Σ_{|j|≤J} c_j e^{ijx}`; negative frequencies are implied by
//! Hermitian symmetry `c_{-j} = conj(c_j)`, so every stored function is
//! real-valued by construction.
//!
//! Convolution follows the unnormalized convention
//! `(f ∗ g)(x) = ∫_0^{2π} f(x − t) g(t) dt`, whose coefficients are
//! `2π f̂(j) ĝ(j)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Sample count and spacing for quadrature and sampling on one period.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralGrid {
    n: usize,
}

impl SpectralGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidProblem(format!(
                "grid size must be an even integer >= 4, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Smallest power-of-two grid with `N >= 4J + 4`, enough to sample
    /// products of two functions of bandwidth `J` without aliasing.
    pub fn for_bandwidth(bandwidth: usize) -> Self {
        let n = (4 * bandwidth + 4).next_power_of_two().max(64);
        Self { n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Quadrature weight `2π/N`.
    pub fn weight(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFunction {
    /// `c_0 ..= c_J`; `c_0` is real.
    coeffs: Vec<Complex64>,
}

impl PeriodicFunction {
    pub fn zero(bandwidth: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); bandwidth + 1],
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            coeffs: vec![Complex64::new(value, 0.0)],
        }
    }

    /// Builds from non-negative-frequency coefficients `c_0..=c_J`. The
    /// imaginary part of `c_0` is dropped; a non-negligible one is rejected.
    pub fn from_nonnegative(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        let scale = 1.0 + coeffs.iter().map(|c| c.norm()).sum::<f64>();
        if coeffs[0].im.abs() > 1e-10 * scale {
            return Err(Error::NotHermitian {
                defect: coeffs[0].im.abs(),
            });
        }
        coeffs[0].im = 0.0;
        Ok(Self { coeffs })
    }

    /// Builds from a two-sided table indexed `-J..=J` (index `j + J`),
    /// checking Hermitian symmetry.
    pub fn from_two_sided(table: &[Complex64]) -> Result<Self> {
        if table.len() % 2 != 1 {
            return Err(Error::InvalidProblem(
                "two-sided coefficient table must have odd length".into(),
            ));
        }
        let bw = table.len() / 2;
        let scale = 1.0 + table.iter().map(|c| c.norm()).sum::<f64>();
        let defect = (0..=bw)
            .map(|j| (table[bw + j] - table[bw - j].conj()).norm())
            .fold(0.0, f64::max);
        if defect > 1e-10 * scale {
            return Err(Error::NotHermitian { defect });
        }
        let coeffs = (0..=bw)
            .map(|j| (table[bw + j] + table[bw - j].conj()) * 0.5)
            .collect();
        Self::from_nonnegative(coeffs)
    }

    /// `a_0 + Σ (a_j cos jx + b_j sin jx)` from `(j, a_j, b_j)` triples.
    /// Repeated frequencies accumulate.
    pub fn from_harmonics(terms: &[(usize, f64, f64)]) -> Self {
        let bw = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); bw + 1];
        for &(j, a, b) in terms {
            if j == 0 {
                coeffs[0] += a;
            } else {
                coeffs[j] += Complex64::new(0.5 * a, -0.5 * b);
            }
        }
        Self { coeffs }
    }

    /// Builds `Σ_{|j|≤J} t(j) e^{ijx}` from a transfer that is assumed to be
    /// Hermitian, `t(-j) = conj(t(j))`.
    pub fn from_fn(bandwidth: usize, mut coeff: impl FnMut(i64) -> Complex64) -> Self {
        let mut coeffs: Vec<Complex64> = (0..=bandwidth as i64).map(&mut coeff).collect();
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn nonnegative_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at any integer frequency; zero beyond the bandwidth.
    pub fn coeff(&self, j: i64) -> Complex64 {
        let k = j.unsigned_abs() as usize;
        match self.coeffs.get(k) {
            None => Complex64::new(0.0, 0.0),
            Some(c) if j < 0 => c.conj(),
            Some(c) => *c,
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let x = x.rem_euclid(TAU);
        let mut acc = 0.0;
        // Re-anchor the rotation periodically so the phase error stays at
        // round-off level for large bandwidths.
        let step = Complex64::from_polar(1.0, x);
        let mut rot = Complex64::new(1.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            if j % 64 == 0 {
                rot = Complex64::from_polar(1.0, j as f64 * x);
            } else {
                rot *= step;
            }
            acc += (c * rot).re;
        }
        self.coeffs[0].re + 2.0 * acc
    }

    /// Multiplies coefficient `j` by `transfer(j)` for `j = 0..=J`.
    pub fn apply_transfer(&self, mut transfer: impl FnMut(i64) -> Complex64) -> Self {
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * transfer(j as i64))
            .collect();
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let bw = self.bandwidth().min(other.bandwidth());
        let coeffs = (0..=bw)
            .map(|j| self.coeffs[j] * other.coeffs[j] * TAU)
            .collect();
        Self { coeffs }
    }

    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        self.apply_transfer(|j| Complex64::new(0.0, j as f64).powu(order))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// `self + alpha * other`, with the larger bandwidth.
    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Self {
        let bw = self.bandwidth().max(other.bandwidth());
        let coeffs = (0..=bw)
            .map(|j| {
                let a = self.coeffs.get(j).copied().unwrap_or_default();
                let b = other.coeffs.get(j).copied().unwrap_or_default();
                a + b * alpha
            })
            .collect();
        Self { coeffs }
    }

    /// Samples `f(2πi/N)` for `i = 0..N`. When `N < 2J + 1` the synthesis
    /// runs on a finer multiple of `N` and is decimated, so the samples are
    /// exact point values rather than aliased ones.
    pub fn samples(&self, grid: &SpectralGrid) -> Vec<f64> {
        let n = grid.len();
        let bw = self.bandwidth();
        let factor = (2 * bw + 1).div_ceil(n).max(1);
        let size = n * factor;
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        buf[0] = self.coeffs[0];
        for j in 1..=bw {
            buf[j] += self.coeffs[j];
            buf[size - j] += self.coeffs[j].conj();
        }
        FftPlanner::new().plan_fft_inverse(size).process(&mut buf);
        buf.iter().step_by(factor).map(|c| c.re).collect()
    }

    /// Least-squares trigonometric fit of bandwidth `bandwidth` to samples on
    /// a uniform grid; exact for trig polynomials when `N >= 2J + 2`.
    pub fn fit(samples: &[f64], bandwidth: usize) -> Result<Self> {
        let n = samples.len();
        if n < 2 * bandwidth + 2 {
            return Err(Error::InvalidProblem(format!(
                "{n} samples cannot resolve bandwidth {bandwidth}"
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let coeffs = buf[..=bandwidth].iter().map(|c| c / n as f64).collect();
        Self::from_nonnegative(coeffs)
    }

    /// Grid maximum of `|f|`, refined by golden-section search in the cells
    /// around every grid local maximum that comes close to the grid maximum.
    pub fn sup_norm(&self, grid: &SpectralGrid) -> f64 {
        let samples = self.samples(grid);
        sup_norm_refined(&samples, grid, |x| self.evaluate(x).abs())
    }

    pub fn count_sign_changes(&self, grid: &SpectralGrid, zero_tol: f64) -> Result<usize> {
        count_sign_changes(&self.samples(grid), zero_tol)
    }
}

/// Refines a grid maximum of a nonnegative function `abs_f` given its
/// samples (signed samples are fine, only magnitudes are used).
pub(crate) fn sup_norm_refined(samples: &[f64], grid: &SpectralGrid, abs_f: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len();
    let mags: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    let grid_max = mags.iter().copied().fold(0.0, f64::max);
    if grid_max == 0.0 {
        return 0.0;
    }
    let h = grid.weight();
    let mut best = grid_max;
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = mags[(i + n - 1) % n];
            let next = mags[(i + 1) % n];
            mags[i] >= prev && mags[i] >= next && mags[i] >= 0.5 * grid_max
        })
        .collect();
    candidates.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    candidates.truncate(64);
    for i in candidates {
        let center = grid.point(i);
        let v = golden_section_max(&abs_f, center - h, center + h, 1e-13 * h.max(1e-3));
        best = best.max(v);
    }
    best
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.max(fd);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// Indices of the samples that survive the relative zero tolerance.
fn accepted(samples: &[f64], zero_tol: f64) -> Result<Vec<usize>> {
    let max = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::AllZero);
    }
    let cutoff = zero_tol * max;
    let idx: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].abs() >= cutoff && samples[i] != 0.0)
        .collect();
    if idx.is_empty() {
        return Err(Error::AllZero);
    }
    Ok(idx)
}

/// Cyclic sign alternations of a sampled period, skipping samples below
/// `zero_tol` relative to the largest magnitude. Always even.
pub fn count_sign_changes(samples: &[f64], zero_tol: f64) -> Result<usize> {
    Ok(sign_change_brackets(samples, zero_tol)?.len())
}

/// Pairs `(a, b)` of consecutive accepted sample indices (cyclically) whose
/// signs differ. For the wrap-around pair `b < a`.
pub fn sign_change_brackets(samples: &[f64], zero_tol: f64) -> Result<Vec<(usize, usize)>> {
    let idx = accepted(samples, zero_tol)?;
    let k = idx.len();
    let brackets = (0..k)
        .map(|p| (idx[p], idx[(p + 1) % k]))
        .filter(|&(a, b)| (samples[a] > 0.0) != (samples[b] > 0.0))
        .collect();
    Ok(brackets)
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Cyclic distance between two angles.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
