//! Periodic perfect splines stored by their `r`-th derivative data.
//!
//! A spline of order `r` with knots `t_0 < … < t_{2n-1}` has
//! `s^{(r)} = ξ·ε·(−1)^i` on `(t_i, t_{i+1})` and is recovered as
//! `s = ξ·(σ ∗ B_r) + a`, where `σ` is the ±1 step function with leading
//! sign `ε` and `B_r` the Bernoulli kernel. Expanding the convolution knot
//! by knot gives the closed form
//!
//! ```text
//! s(x) = 2εξ Σ_i (−1)^i B_{r+1}(x − t_i) + a
//! ```
//!
//! which [`PerfectSpline::eval`] uses. The truncated Fourier route
//! ([`PerfectSpline::eval_spectral`]) is kept alongside as a cross-check.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{periodic_bernoulli, WeightFunction};
use crate::spectral::{wrap_angle, PeriodicFunction};

/// Parse-time tolerance on the signed interval length sum.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PerfectSpline {
    order: u32,
    knots: Vec<f64>,
    lead_sign: f64,
    amplitude: f64,
    offset: f64,
}

/// On-disk form: `{r, knots, lead_sign, xi, offset}` with angles in radians.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplineFile {
    pub r: u32,
    pub knots: Vec<f64>,
    pub lead_sign: i32,
    pub xi: f64,
    pub offset: f64,
}

impl PerfectSpline {
    /// Builds a spline from knots given in cyclic order (they may extend
    /// past `2π` as long as they span less than one period). Knots are
    /// wrapped into `[0, 2π)` and rotated so `t_0` is the smallest; the
    /// leading sign follows the rotation.
    pub fn new(order: u32, knots: Vec<f64>, lead_sign: f64, amplitude: f64, offset: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidSpline("order must be >= 1".into()));
        }
        if lead_sign != 1.0 && lead_sign != -1.0 {
            return Err(Error::InvalidSpline(format!("lead sign must be ±1, got {lead_sign}")));
        }
        if !amplitude.is_finite() || !offset.is_finite() || knots.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSpline("non-finite value".into()));
        }
        if !knots.len().is_multiple_of(2) {
            return Err(Error::InvalidSpline(format!("odd knot count {}", knots.len())));
        }
        if amplitude == 0.0 && !knots.is_empty() {
            return Err(Error::InvalidSpline("zero amplitude requires an empty knot list".into()));
        }
        if amplitude != 0.0 && knots.is_empty() {
            return Err(Error::InvalidSpline("nonzero amplitude requires knots".into()));
        }
        let (knots, lead_sign) = normalize_knots(&knots, lead_sign)?;
        Ok(Self {
            order,
            knots,
            lead_sign,
            amplitude,
            offset,
        })
    }

    pub fn constant(order: u32, value: f64) -> Self {
        Self {
            order,
            knots: Vec::new(),
            lead_sign: 1.0,
            amplitude: 0.0,
            offset: value,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn lead_sign(&self) -> f64 {
        self.lead_sign
    }

    /// `ξ`; `‖s^{(r)}‖∞ = |ξ|`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_constant(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.order, self.knots.clone(), self.lead_sign, amplitude, self.offset)
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        Self { offset, ..self.clone() }
    }

    pub fn mean_zero_residual(&self) -> f64 {
        mean_zero_residual(&self.knots)
    }

    /// `s^{(r)}(x)`; at a knot, the value of the interval to its right.
    pub fn step_value(&self, x: f64) -> f64 {
        if self.knots.is_empty() {
            return 0.0;
        }
        let x = wrap_angle(x);
        // number of knots <= x, cyclically anchored at t_0
        let count = self.knots.partition_point(|&t| t <= x);
        let interval = if count == 0 { self.knots.len() - 1 } else { count - 1 };
        let sign = if interval % 2 == 0 { 1.0 } else { -1.0 };
        self.amplitude * self.lead_sign * sign
    }

    pub fn step_spectrum(&self, j: i64) -> Complex64 {
        step_spectrum(&self.knots, self.lead_sign, j)
    }

    /// Exact value from the Bernoulli-polynomial closed form.
    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Exact `s^{(d)}(x)` for `d <= r`.
    pub fn derivative(&self, x: f64, d: u32) -> f64 {
        assert!(d <= self.order, "derivative order exceeds spline order");
        if d == self.order {
            return self.step_value(x);
        }
        let base = if d == 0 { self.offset } else { 0.0 };
        if self.knots.is_empty() {
            return base;
        }
        let k = (self.order - d + 1) as usize;
        base + 2.0 * self.lead_sign * self.amplitude * alternating_sum(&self.knots, |t| periodic_bernoulli(k, x - t))
    }

    /// `∫ φ(x − x_k) s(x) dx` in closed form.
    pub fn weighted_mean(&self, weight: &WeightFunction, node: f64) -> f64 {
        if self.knots.is_empty() {
            return self.offset;
        }
        let k = self.order as usize + 1;
        self.offset
            + 2.0 * self.lead_sign * self.amplitude
                * alternating_sum(&self.knots, |t| weight.smooth_bernoulli(k, node - t))
    }

    /// `ξ Σ_{0<|j|≤J} σ̂(j) (ij)^{−r} e^{ijx} + a`.
    pub fn eval_spectral(&self, x: f64, bandwidth: usize) -> f64 {
        self.spectral_sum(bandwidth, x, |_| 1.0)
    }

    /// `ξ Σ_{0<|j|≤J} σ̂(j) (ij)^{−r} ŵ(j) e^{ijx_k} + a`.
    pub fn weighted_mean_spectral(&self, weight: &WeightFunction, node: f64, bandwidth: usize) -> f64 {
        self.spectral_sum(bandwidth, node, |j| weight.transfer(j))
    }

    fn spectral_sum(&self, bandwidth: usize, x: f64, transfer: impl Fn(i64) -> f64) -> f64 {
        if self.knots.is_empty() {
            return self.offset;
        }
        let r = self.order as i32;
        let acc: f64 = (1..=bandwidth as i64)
            .map(|j| {
                let c = self.step_spectrum(j) * Complex64::new(0.0, j as f64).powi(-r);
                (c * Complex64::from_polar(1.0, j as f64 * x)).re * transfer(j)
            })
            .sum();
        self.amplitude * 2.0 * acc + self.offset
    }

    /// Truncated Fourier series of the spline at bandwidth `J`.
    pub fn to_spectral(&self, bandwidth: usize) -> PeriodicFunction {
        if self.knots.is_empty() {
            return PeriodicFunction::constant(self.offset);
        }
        let r = self.order as i32;
        PeriodicFunction::from_fn(bandwidth, |j| {
            if j == 0 {
                Complex64::new(self.offset, 0.0)
            } else {
                self.step_spectrum(j) * Complex64::new(0.0, j as f64).powi(-r) * self.amplitude
            }
        })
    }

    pub fn to_file(&self) -> SplineFile {
        SplineFile {
            r: self.order,
            knots: self.knots.clone(),
            lead_sign: self.lead_sign as i32,
            xi: self.amplitude,
            offset: self.offset,
        }
    }

    pub fn from_file(file: &SplineFile) -> Result<Self> {
        let s = Self::new(file.r, file.knots.clone(), file.lead_sign as f64, file.xi, file.offset)?;
        let res = s.mean_zero_residual();
        if res.abs() > MEAN_ZERO_TOL {
            return Err(Error::MeanZeroViolation {
                residual: res,
                limit: MEAN_ZERO_TOL,
            });
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

/// `Σ_i (−1)^i term(t_i)`.
pub(crate) fn alternating_sum(knots: &[f64], term: impl Fn(f64) -> f64) -> f64 {
    knots
        .iter()
        .enumerate()
        .map(|(i, &t)| if i % 2 == 0 { term(t) } else { -term(t) })
        .sum()
}

/// `Σ_i (−1)^i (t_{i+1} − t_i)` with `t_{2n} = t_0 + 2π`; zero for no knots.
pub fn mean_zero_residual(knots: &[f64]) -> f64 {
    let n = knots.len();
    if n == 0 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let next = if i + 1 == n { knots[0] + TAU } else { knots[i + 1] };
            let len = next - knots[i];
            if i % 2 == 0 {
                len
            } else {
                -len
            }
        })
        .sum()
}

/// Fourier coefficient `σ̂(j)` of the ±1 step function with the given knots
/// and leading sign.
pub fn step_spectrum(knots: &[f64], lead_sign: f64, j: i64) -> Complex64 {
    if knots.is_empty() {
        return Complex64::new(if j == 0 { lead_sign } else { 0.0 }, 0.0);
    }
    if j == 0 {
        return Complex64::new(lead_sign * mean_zero_residual(knots) / TAU, 0.0);
    }
    let jf = j as f64;
    let sum: Complex64 = knots
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let e = Complex64::from_polar(1.0, -jf * t);
            if i % 2 == 0 {
                e
            } else {
                -e
            }
        })
        .sum();
    sum * lead_sign / Complex64::new(0.0, PI * jf)
}

/// Wraps knots into `[0, 2π)` and rotates them so the smallest comes first,
/// flipping the leading sign on odd rotations.
fn normalize_knots(knots: &[f64], lead_sign: f64) -> Result<(Vec<f64>, f64)> {
    if knots.is_empty() {
        return Ok((Vec::new(), lead_sign));
    }
    let wrapped: Vec<f64> = knots.iter().map(|&t| wrap_angle(t)).collect();
    let start = wrapped
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let n = wrapped.len();
    let rotated: Vec<f64> = (0..n).map(|i| wrapped[(start + i) % n]).collect();
    if rotated.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::KnotOrderViolation);
    }
    let sign = if start % 2 == 0 { lead_sign } else { -lead_sign };
    Ok((rotated, sign))
}
